use super::{FactoryError, Gadgets, Generated, Recorder, ReductionCertificate, Source};
use crate::factory::graph::Graph;
use crate::factory::CertificateSequence;

fn edge_agent(g: &Graph, e: usize, l: usize) -> String {
    format!("e{l}[{}]", g.edge_label(e))
}

fn vertex_agent(v: usize, l: usize) -> String {
    format!("v{l}[{v}]")
}

fn y(g: &Graph, e: usize, v: usize) -> String {
    format!("y[e={},v={v}]", g.edge_label(e))
}

fn x(g: &Graph, v: usize, e: usize) -> String {
    format!("x[v={v},e={}]", g.edge_label(e))
}

fn r(name: &str) -> String {
    Gadgets::r(name)
}

/// Four agents per edge and eight per vertex of a 3-regular graph. Every list has
/// at most four items and every item at most three acceptors.
pub fn gen_vertex_cover(graph: &Graph) -> Result<Generated, FactoryError> {
    if let Some(v) = (0..graph.num_vertices()).find(|&v| graph.degree(v) != 3) {
        return Err(FactoryError::InvalidGraph(format!("vertex {v} has degree {}, expected 3", graph.degree(v))));
    }
    let mut gd = Gadgets::new();
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let a = |l| edge_agent(graph, e, l);
        gd.agent(&a(1), None, &[y(graph, e, v), r(&a(2))]);
        gd.agent(&a(2), None, &[r(&a(3)), x(graph, v, e)]);
        gd.agent(&a(3), None, &[y(graph, e, u), r(&a(4))]);
        gd.agent(&a(4), None, &[r(&a(1)), x(graph, u, e)]);
    }
    for v in 0..graph.num_vertices() {
        let inc = graph.incident(v);
        let (e, f, g) = (inc[0], inc[1], inc[2]);
        let a = |l| vertex_agent(v, l);
        gd.agent(&a(1), None, &[format!("t[v={v}]"), r(&a(2))]);
        gd.agent(&a(2), None, &[r(&a(3)), r(&a(4))]);
        gd.agent(&a(3), None, &[y(graph, e, v), y(graph, f, v)]);
        gd.agent(&a(4), None, &[y(graph, g, v)]);
        gd.agent(&a(5), None, &[r(&a(1))]);
        gd.agent(&a(6), Some(&x(graph, v, e)), &[r(&a(1))]);
        gd.agent(&a(7), Some(&x(graph, v, f)), &[r(&a(5))]);
        gd.agent(&a(8), Some(&x(graph, v, g)), &[r(&a(5))]);
    }
    let (instance, initial) = gd.finish();
    let agents = instance.num_agents();
    Ok(Generated {
        instance,
        initial,
        certificate: ReductionCertificate { source: Source::VertexCover { graph: graph.clone() }, agents },
    })
}

/// The five-phase sequence of length `|N| + |E| + |cover|` built from a vertex cover.
pub fn claim1_sequence(gen: &Generated, cover: &[usize]) -> Result<CertificateSequence, FactoryError> {
    let Source::VertexCover { graph } = &gen.certificate.source else { return Err(FactoryError::WrongFamily) };
    let mut cover = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    if cover.iter().any(|&v| v >= graph.num_vertices()) {
        return Err(FactoryError::BadWitness("cover names an unknown vertex".into()));
    }
    if !graph.is_vertex_cover(&cover) {
        return Err(FactoryError::BadWitness("not a vertex cover".into()));
    }
    let inst = &gen.instance;
    let mut rec = Recorder::new(inst, &gen.initial);
    let va = vertex_agent;
    let ea = |e, l| edge_agent(graph, e, l);
    let to_r = |rec: &mut Recorder<'_>, phase: &str, a: &str| {
        let i = inst.agent_id(a).expect("generated agent");
        let item = inst.item_name(inst.prefs(i)[0]).to_string();
        rec.mv(phase, a, &item)
    };

    for &v in &cover {
        rec.mv("1", &va(v, 1), &format!("t[v={v}]"))?;
        for l in 2..=4 {
            to_r(&mut rec, "1", &va(v, l))?;
        }
    }
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        if cover.contains(&v) {
            rec.mv("2", &ea(e, 1), &y(graph, e, v))?;
            for l in [2, 3, 4, 1] {
                to_r(&mut rec, "2", &ea(e, l))?;
            }
        } else {
            rec.mv("2", &ea(e, 3), &y(graph, e, u))?;
            for l in [4, 1, 2, 3] {
                to_r(&mut rec, "2", &ea(e, l))?;
            }
        }
    }
    for v in 0..graph.num_vertices() {
        for l in [6, 7, 8, 5] {
            to_r(&mut rec, "3", &va(v, l))?;
        }
    }
    for &v in &cover {
        to_r(&mut rec, "4", &va(v, 1))?;
    }
    for v in (0..graph.num_vertices()).filter(|v| !cover.contains(v)) {
        for l in 1..=4 {
            to_r(&mut rec, "5", &va(v, l))?;
        }
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{reformist_matching, verify_sequence};
    use crate::model::is_envy_free;

    #[test]
    fn k4_counts_and_caps() {
        let gen = gen_vertex_cover(&Graph::complete(4)).unwrap();
        let inst = &gen.instance;
        assert_eq!(inst.num_agents(), 56);
        assert!(inst.max_list_len() <= 4);
        assert!(inst.max_acceptors() <= 3);
        assert!(is_envy_free(inst, &gen.initial).unwrap());
        let sigma = reformist_matching(inst, &gen.initial).unwrap();
        assert!((0..inst.num_agents()).all(|i| sigma.item(i) == inst.prefs(i)[0]));
    }

    #[test]
    fn k4_certificates() {
        let gen = gen_vertex_cover(&Graph::complete(4)).unwrap();
        for cover in [vec![0, 1, 2], vec![1, 2, 3], vec![0, 1, 2, 3]] {
            let cert = claim1_sequence(&gen, &cover).unwrap();
            assert_eq!(Some(cert.len()), gen.certificate.predicted_length(cover.len()));
            assert!(verify_sequence(&gen.instance, &cert.sequence).is_reformist());
        }
        assert!(matches!(claim1_sequence(&gen, &[0, 1]), Err(FactoryError::BadWitness(_))));
    }

    #[test]
    fn rejects_irregular_graph() {
        assert!(gen_vertex_cover(&Graph::complete(3)).is_err());
    }
}
