use super::{universe, CertificateSequence, FactoryError, Gadgets, Generated, Recorder, ReductionCertificate, Source};

fn xa(j: usize, l: usize) -> String {
    format!("x[j={j},l={l}]")
}

fn ya(j: usize) -> String {
    format!("y[j={j}]")
}

fn yb(j: usize) -> String {
    format!("y'[j={j}]")
}

fn va(v: u64, l: usize) -> String {
    format!("v[v={v},l={l}]")
}

fn a(j: usize, l: usize) -> String {
    format!("a[j={j},l={l}]")
}

fn b(j: usize, l: usize) -> String {
    format!("b[j={j},l={l}]")
}

fn t(j: usize, v: u64) -> String {
    format!("t[j={j},v={v}]")
}

fn u(j: usize) -> String {
    format!("u[j={j}]")
}

fn normalized(sets: &[Vec<u64>]) -> Vec<Vec<u64>> {
    sets.iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect()
}

/// Sets of 1-based index `j` whose containing sets, for each element, are listed
/// in ascending order.
fn memberships(sets: &[Vec<u64>], v: u64) -> Vec<usize> {
    (1..=sets.len()).filter(|&j| sets[j - 1].contains(&v)).collect()
}

/// Builds the set-cover instance. `p >= 2` controls the length of the chain each
/// chosen set pays for.
pub fn gen_set_cover(sets: &[Vec<u64>], p: usize) -> Result<Generated, FactoryError> {
    if p < 2 {
        return Err(FactoryError::InvalidParameter(format!("p must be at least 2, got {p}")));
    }
    let sets = normalized(sets);
    let mut g = Gadgets::new();
    for j in 1..=sets.len() {
        let d = sets[j - 1].len();
        let mut middle = vec![u(j)];
        middle.extend((1..=d).rev().map(|l| Gadgets::r(&xa(j, l))));
        g.agent(&xa(j, 0), None, &middle);
        for (l, &v) in sets[j - 1].iter().enumerate() {
            g.agent(&xa(j, l + 1), None, &[t(j, v)]);
        }

        let mut first = Vec::new();
        for l in (2..=p).rev() {
            first.push(a(j, l));
            first.push(b(j, l));
        }
        first.push(a(j, 1));
        g.plain_agent(&ya(j), &first);

        let mut second = vec![b(j, p), u(j)];
        for l in (2..p).rev() {
            second.push(b(j, l));
            second.push(a(j, l + 1));
        }
        second.push(b(j, 1));
        g.plain_agent(&yb(j), &second);
    }
    for v in universe(&sets) {
        let js = memberships(&sets, v);
        let f = js.len();
        for (l, &j) in js.iter().enumerate() {
            let next = va(v, (l + 1) % f + 1);
            g.agent(&va(v, l + 1), None, &[t(j, v), Gadgets::r(&next)]);
        }
    }
    let zmid: Vec<String> = (1..=sets.len()).map(|j| Gadgets::r(&xa(j, 0))).collect();
    g.agent("z", None, &zmid);
    let (instance, initial) = g.finish();
    let agents = instance.num_agents();
    Ok(Generated {
        instance,
        initial,
        certificate: ReductionCertificate { source: Source::SetCover { sets, p }, agents },
    })
}

/// The certificate sequence for a set cover given by 0-based set indices.
pub fn claim3_sequence(gen: &Generated, cover: &[usize]) -> Result<CertificateSequence, FactoryError> {
    let Source::SetCover { sets, p } = &gen.certificate.source else { return Err(FactoryError::WrongFamily) };
    let p = *p;
    let h = sets.len();
    let mut chosen = vec![false; h + 1];
    for &c in cover {
        if c >= h {
            return Err(FactoryError::BadWitness(format!("set index {c} out of range")));
        }
        chosen[c + 1] = true;
    }
    let elements = universe(sets);
    if let Some(v) = elements.iter().find(|&&v| !memberships(sets, v).iter().any(|&j| chosen[j])) {
        return Err(FactoryError::BadWitness(format!("element {v} is not covered")));
    }
    let inst = &gen.instance;
    let mut rec = Recorder::new(inst, &gen.initial);
    let to_r = |rec: &mut Recorder<'_>, phase: &str, ag: &str| rec.mv(phase, ag, &Gadgets::r(ag));

    for j in (1..=h).filter(|&j| chosen[j]) {
        for l in 2..=p {
            rec.mv("1", &ya(j), &a(j, l))?;
            rec.mv("1", &yb(j), &b(j, l))?;
        }
        rec.mv("1", &xa(j, 0), &u(j))?;
        for l in 1..=sets[j - 1].len() {
            to_r(&mut rec, "1", &xa(j, l))?;
        }
    }
    for &v in &elements {
        let js = memberships(sets, v);
        let f = js.len();
        let c = js.iter().position(|&j| chosen[j]).expect("covered");
        rec.mv("2", &va(v, c + 1), &t(js[c], v))?;
        for step in 1..f {
            to_r(&mut rec, "2", &va(v, (c + step) % f + 1))?;
        }
        to_r(&mut rec, "2", &va(v, c + 1))?;
    }
    to_r(&mut rec, "3", "z")?;
    for j in 1..=h {
        to_r(&mut rec, "4", &xa(j, 0))?;
        if !chosen[j] {
            for l in 1..=sets[j - 1].len() {
                to_r(&mut rec, "4", &xa(j, l))?;
            }
        }
    }
    for j in (1..=h).filter(|&j| !chosen[j]) {
        rec.mv("5", &yb(j), &u(j))?;
        rec.mv("5", &ya(j), &a(j, p))?;
        rec.mv("5", &yb(j), &b(j, p))?;
    }
    Ok(rec.finish())
}
