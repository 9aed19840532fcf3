use super::{CertificateSequence, FactoryError, Gadgets, Generated, Recorder, ReductionCertificate, Source};
use crate::factory::graph::Graph;

fn vertex_agent(v: usize, l: usize) -> String {
    format!("v[j={v},l={l}]")
}

fn edge_agent(g: &Graph, e: usize) -> String {
    format!("e[{}]", g.edge_label(e))
}

fn y(g: &Graph, e: usize) -> String {
    format!("y[e={}]", g.edge_label(e))
}

fn z(v: usize) -> String {
    format!("z[v={v}]")
}

/// Edges between parts `a < b`, ascending.
fn between(graph: &Graph, parts: &[usize], a: usize, b: usize) -> Vec<usize> {
    (0..graph.num_edges())
        .filter(|&e| {
            let (u, v) = graph.edges()[e];
            let (pu, pv) = (parts[u].min(parts[v]), parts[u].max(parts[v]));
            (pu, pv) == (a, b)
        })
        .collect()
}

fn num_parts(parts: &[usize]) -> usize {
    parts.iter().max().map_or(0, |&m| m + 1)
}

/// Builds the instance for a graph whose vertices are split into `k` parts.
/// `parts[v]` is the part of vertex `v`; every part must be nonempty and no edge
/// may join two vertices of the same part.
pub fn gen_multicolored_clique(graph: &Graph, parts: &[usize], k: usize) -> Result<Generated, FactoryError> {
    let n = graph.num_vertices();
    if parts.len() != n {
        return Err(FactoryError::InvalidGraph(format!("{} part labels for {n} vertices", parts.len())));
    }
    if let Some(v) = (0..n).find(|&v| parts[v] >= k) {
        return Err(FactoryError::InvalidGraph(format!("vertex {v} has part {} but k = {k}", parts[v])));
    }
    if let Some(c) = (0..k).find(|c| !parts.contains(c)) {
        return Err(FactoryError::InvalidGraph(format!("part {c} is empty")));
    }
    if let Some(&(u, v)) = graph.edges().iter().find(|&&(u, v)| parts[u] == parts[v]) {
        return Err(FactoryError::InvalidGraph(format!("edge {u}-{v} lies inside part {}", parts[u])));
    }

    let mut g = Gadgets::new();
    for v in 0..n {
        let inc = graph.incident(v);
        let mut middle = vec![z(v)];
        middle.extend((1..=inc.len()).rev().map(|l| Gadgets::r(&vertex_agent(v, l))));
        g.agent(&vertex_agent(v, 0), None, &middle);
        for (l, &e) in inc.iter().enumerate() {
            g.agent(&vertex_agent(v, l + 1), None, &[y(graph, e)]);
        }
    }
    for pa in 0..k {
        for pb in pa + 1..k {
            let es = between(graph, parts, pa, pb);
            for (i, &e) in es.iter().enumerate() {
                let next = edge_agent(graph, es[(i + 1) % es.len()]);
                g.agent(&edge_agent(graph, e), None, &[y(graph, e), Gadgets::r(&next), Gadgets::r("a")]);
            }
        }
    }
    let amid: Vec<String> = (0..n).rev().map(|v| Gadgets::r(&vertex_agent(v, 0))).collect();
    g.agent("a", None, &amid);
    let (instance, initial) = g.finish();
    let agents = instance.num_agents();
    Ok(Generated {
        instance,
        initial,
        certificate: ReductionCertificate {
            source: Source::MulticoloredClique { graph: graph.clone(), parts: parts.to_vec() },
            agents,
        },
    })
}

/// The certificate sequence for a multicolored clique, one vertex per part.
pub fn clique_sequence(gen: &Generated, clique: &[usize]) -> Result<CertificateSequence, FactoryError> {
    let Source::MulticoloredClique { graph, parts } = &gen.certificate.source else {
        return Err(FactoryError::WrongFamily);
    };
    let n = graph.num_vertices();
    let k = num_parts(parts);
    if clique.iter().any(|&v| v >= n) {
        return Err(FactoryError::BadWitness("clique names an unknown vertex".into()));
    }
    let mut pick = vec![None; k];
    for &v in clique {
        if pick[parts[v]].replace(v).is_some() {
            return Err(FactoryError::BadWitness(format!("two clique vertices in part {}", parts[v])));
        }
    }
    if pick.iter().any(Option::is_none) {
        return Err(FactoryError::BadWitness("some part has no clique vertex".into()));
    }
    let pick: Vec<usize> = pick.into_iter().map(Option::unwrap).collect();
    for a in 0..k {
        for b in a + 1..k {
            if !graph.has_edge(pick[a], pick[b]) {
                return Err(FactoryError::BadWitness(format!("vertices {} and {} are not adjacent", pick[a], pick[b])));
            }
        }
    }
    let in_x = |v: usize| pick.contains(&v);
    let inst = &gen.instance;
    let mut rec = Recorder::new(inst, &gen.initial);
    let to_r = |rec: &mut Recorder<'_>, phase: &str, ag: &str| rec.mv(phase, ag, &Gadgets::r(ag));

    let mut xs = pick.clone();
    xs.sort_unstable();
    for &v in &xs {
        rec.mv("1", &vertex_agent(v, 0), &z(v))?;
        for l in 1..=graph.degree(v) {
            to_r(&mut rec, "1", &vertex_agent(v, l))?;
        }
    }
    for pa in 0..k {
        for pb in pa + 1..k {
            let es = between(graph, parts, pa, pb);
            let c = es
                .iter()
                .position(|&e| graph.edges()[e] == (pick[pa].min(pick[pb]), pick[pa].max(pick[pb])))
                .expect("clique edge");
            rec.mv("2", &edge_agent(graph, es[c]), &y(graph, es[c]))?;
            for step in 1..es.len() {
                to_r(&mut rec, "2", &edge_agent(graph, es[(c + step) % es.len()]))?;
            }
            to_r(&mut rec, "2", &edge_agent(graph, es[c]))?;
        }
    }
    to_r(&mut rec, "3", "a")?;
    for &v in &xs {
        to_r(&mut rec, "4", &vertex_agent(v, 0))?;
    }
    for v in (0..n).filter(|&v| !in_x(v)) {
        for l in 0..=graph.degree(v) {
            to_r(&mut rec, "5", &vertex_agent(v, l))?;
        }
    }
    Ok(rec.finish())
}
