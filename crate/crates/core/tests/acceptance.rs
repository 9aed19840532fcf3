//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or exceeds its time limit.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reformist::engine::{preprocess, reformist_matching};
use reformist::factory::{
    claim1_sequence, claim3_sequence, clique_sequence, gen_exponential_gap, gen_multicolored_clique, gen_random,
    gen_set_cover, gen_vertex_cover, Graph, RandomConfig,
};
use reformist::io::cli::run;
use reformist::solvers::{
    bfs_shortest, fpt_by_intermediate, fpt_by_length, intermediate_items, shortest_deg3, shortest_two_acceptor,
};
use reformist::{
    compute_reformist, is_reachable, solve_auto, verify_sequence, Instance, Matching, NominationPolicy, SolveOptions,
};

const BUDGET: usize = 1 << 22;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, u64, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Corpora {
    uniqueness: Vec<(Instance, Matching)>,
    short_lists: Vec<(Instance, Matching)>,
    two_acceptor: Vec<(Instance, Matching)>,
}

/// Original (unreduced) instances whose reduced form has at least one agent.
fn corpus(count: usize, seed: u64, mk: impl Fn(&mut ChaCha8Rng) -> RandomConfig) -> Vec<(Instance, Matching)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let cfg = mk(&mut rng);
        let Ok((inst, mu)) = gen_random(&cfg) else { continue };
        if preprocess(&inst, &mu).unwrap().reduced.num_agents() > 0 {
            out.push((inst, mu));
        }
    }
    out
}

fn small_config(rng: &mut ChaCha8Rng) -> RandomConfig {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(n..=10);
    RandomConfig::new(n, m, rng.gen_range(1..=6), rng.gen())
}

fn build_corpora() -> Corpora {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut uniqueness = Vec::new();
    while uniqueness.len() < 200 {
        if let Ok(pair) = gen_random(&small_config(&mut rng)) {
            uniqueness.push(pair);
        }
    }
    let short_lists = corpus(300, 41, |r| {
        let n = r.gen_range(1..=6);
        RandomConfig::new(n, r.gen_range(n..=10), 3, r.gen())
    });
    let two_acceptor = corpus(500, 42, |r| {
        let n = r.gen_range(1..=6);
        RandomConfig::new(n, r.gen_range(n..=10), r.gen_range(2..=6), r.gen()).with_max_acceptors(2)
    });
    Corpora { uniqueness, short_lists, two_acceptor }
}

fn reduce(inst: &Instance, mu: &Matching) -> (Instance, Matching) {
    let rep = preprocess(inst, mu).unwrap();
    (rep.reduced, rep.reduced_initial)
}

fn c1_worked_example() -> Check {
    let path = common::data("ex1.json");
    let path = path.to_str().unwrap();
    let call = |args: &[&str]| {
        let mut out = Vec::new();
        let code = run(std::iter::once("reformist").chain(args.iter().copied()), &mut out, &mut Vec::new());
        (code, String::from_utf8(out).unwrap())
    };
    let (code, text) = call(&["shortest", path]);
    let expected = "length: 3\n";
    ensure(code == 0 && text.starts_with(expected), || format!("shortest printed {text:?}"))?;
    let steps: Vec<&str> = text.lines().filter(|l| l.starts_with("  ")).map(str::trim).collect();
    ensure(steps == ["1: x -> r", "2: y -> q", "1: r -> p"], || format!("steps {steps:?}"))?;
    let (inst, mu) = common::ex1();
    let (_, opt) = common::brute_reformist(&inst, mu.as_slice());
    ensure(opt == 3, || format!("oracle optimum {opt}"))?;
    let (code, text) = call(&["reform", path]);
    ensure(code == 0 && text.starts_with("final: 1->p, 2->q\n"), || format!("reform printed {text:?}"))?;
    Ok("length 3, x->r, y->q, r->p; final (p,q)".into())
}

fn policies(n: usize, rng: &mut ChaCha8Rng) -> Vec<NominationPolicy> {
    let mut out = vec![NominationPolicy::BestFirst, NominationPolicy::RoundRobin];
    for _ in 0..9 {
        out.push(NominationPolicy::Random { seed: rng.gen() });
    }
    for _ in 0..9 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        out.push(NominationPolicy::FixedOrder(order));
    }
    out
}

fn c2_uniqueness(c: &Corpora) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut runs = 0;
    for (k, (inst, mu)) in c.uniqueness.iter().enumerate() {
        let (oracle, _) = common::brute_reformist(inst, mu.as_slice());
        for p in policies(inst.num_agents(), &mut rng) {
            let (sigma, seq) = compute_reformist(inst, mu, &p).map_err(|e| format!("instance {k}: {e}"))?;
            ensure(sigma.as_slice() == &oracle[..], || format!("instance {k}: {p:?} ended elsewhere"))?;
            ensure(verify_sequence(inst, &seq).is_reformist(), || format!("instance {k}: {p:?} sequence invalid"))?;
            runs += 1;
        }
    }
    Ok(format!("{} instances, {runs} runs, one terminal matching each", c.uniqueness.len()))
}

fn c3_gap() -> Check {
    for p in 2..=6 {
        let (inst, mu) = gen_exponential_gap(p).unwrap();
        let mut lengths = Vec::new();
        for order in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let (_, seq) = compute_reformist(&inst, &mu, &NominationPolicy::FixedOrder(order.to_vec())).unwrap();
            lengths.push(seq.len());
        }
        ensure(lengths[0] == 2 * p - 1, || format!("p = {p}: order 1,2,3 took {}", lengths[0]))?;
        let worst = *lengths.iter().max().unwrap();
        ensure(worst == (2 * p - 1).max(4), || format!("p = {p}: worst fixed order {worst}"))?;
        let res = solve_auto(&inst, &mu, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let len = res.length().unwrap_or(usize::MAX);
        ensure(len <= 4, || format!("p = {p}: solve_auto {len}"))?;
        ensure(verify_sequence(&inst, res.sequence.as_ref().unwrap()).is_reformist(), || format!("p = {p}: invalid"))?;
        if p <= 4 {
            let (_, opt) = common::brute_reformist(&inst, mu.as_slice());
            ensure(opt == len, || format!("p = {p}: oracle {opt}, solver {len}"))?;
        }
    }
    Ok("order 1,2,3 takes 2p-1 for p = 2..6 (worst over all orders is max(2p-1, 4)), shortest <= 4, oracle exact for p <= 4".into())
}

fn c4_deg3(c: &Corpora) -> Check {
    for (k, (inst, mu)) in c.short_lists.iter().enumerate() {
        let (inst, mu) = reduce(inst, mu);
        let n = inst.num_agents();
        let fast = shortest_deg3(&inst, &mu).map_err(|e| format!("instance {k}: {e}"))?;
        let exact = bfs_shortest(&inst, &mu, BUDGET).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(fast.length() == Some(n), || format!("instance {k}: length {:?}, n = {n}", fast.length()))?;
        ensure(fast.length() == exact.length(), || format!("instance {k}: bfs {:?}", exact.length()))?;
        ensure(verify_sequence(&inst, fast.sequence.as_ref().unwrap()).is_reformist(), || {
            format!("instance {k}: invalid")
        })?;
    }
    Ok(format!("{} instances, length n = bfs", c.short_lists.len()))
}

fn c5_two_acceptor(c: &Corpora) -> Check {
    let mut calls = 0;
    for (k, (inst, mu)) in c.two_acceptor.iter().enumerate() {
        let (inst, mu) = reduce(inst, mu);
        let fast = shortest_two_acceptor(&inst, &mu).map_err(|e| format!("instance {k}: {e}"))?;
        let exact = bfs_shortest(&inst, &mu, BUDGET).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(fast.length() == exact.length(), || {
            format!("instance {k}: {:?} vs bfs {:?}", fast.length(), exact.length())
        })?;
        ensure(verify_sequence(&inst, fast.sequence.as_ref().unwrap()).is_reformist(), || {
            format!("instance {k}: invalid")
        })?;
        let t = &fast.stats.measure_trace;
        ensure(t.windows(2).all(|w| w[1] < w[0]), || format!("instance {k}: measure trace {t:?}"))?;
        calls += t.len();
    }
    Ok(format!("{} instances equal bfs, measure strictly decreasing over {calls} calls", c.two_acceptor.len()))
}

fn c6_fpt(c: &Corpora) -> Check {
    let (mut checked, mut with_k) = (0, 0);
    for (k, (inst, mu)) in c.short_lists.iter().chain(&c.two_acceptor).enumerate() {
        let (inst, mu) = reduce(inst, mu);
        let exact = bfs_shortest(&inst, &mu, BUDGET).map_err(|e| e.to_string())?.length().unwrap();
        let n = inst.num_agents() as u64;
        let by_len = fpt_by_length(&inst, &mu, exact).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(by_len.length() == Some(exact), || {
            format!("instance {k}: fpt-length {:?} vs {exact}", by_len.length())
        })?;
        let bound = n.saturating_pow(exact as u32);
        ensure(by_len.stats.nodes <= bound, || format!("instance {k}: {} nodes > {bound}", by_len.stats.nodes))?;
        if exact > 0 {
            let below = fpt_by_length(&inst, &mu, exact - 1).map_err(|e| e.to_string())?;
            ensure(!below.is_feasible(), || format!("instance {k}: feasible below optimum"))?;
        }
        let sigma = reformist_matching(&inst, &mu).unwrap();
        let kk = intermediate_items(&inst, &mu, &sigma).len();
        if kk <= 4 {
            let by_k = fpt_by_intermediate(&inst, &mu).map_err(|e| format!("instance {k}: {e}"))?;
            ensure(by_k.length() == Some(exact), || format!("instance {k}: fpt-k {:?} vs {exact}", by_k.length()))?;
            ensure(by_k.stats.max_depth <= kk, || {
                format!("instance {k}: depth {} > |K| = {kk}", by_k.stats.max_depth)
            })?;
            with_k += 1;
        }
        checked += 1;
    }
    Ok(format!("{checked} instances for fpt-length, {with_k} with |K| <= 4 for fpt-k"))
}

fn c7_certificates() -> Check {
    let vc = gen_vertex_cover(&Graph::complete(4)).map_err(|e| e.to_string())?;
    let cert = claim1_sequence(&vc, &[0, 1, 2]).map_err(|e| e.to_string())?;
    let expected = vc.instance.num_agents() + 6 + 3;
    ensure(cert.len() == 65 && expected == 65, || format!("vertex cover: {} steps", cert.len()))?;
    ensure(verify_sequence(&vc.instance, &cert.sequence).is_reformist(), || "vertex cover: invalid".into())?;

    let p = 3;
    let sc = gen_set_cover(&[vec![1, 2], vec![2, 3]], p).map_err(|e| e.to_string())?;
    let cert3 = claim3_sequence(&sc, &[0, 1]).map_err(|e| e.to_string())?;
    // (2p - 4)k + 2T + 4h + |V| + 1 with k = 2, T = 4, h = 2, |V| = 3
    let closed = (2 * p - 4) * 2 + 2 * 4 + 4 * 2 + 3 + 1;
    ensure(cert3.len() == closed, || format!("set cover: {} steps, expected {closed}", cert3.len()))?;
    ensure(verify_sequence(&sc.instance, &cert3.sequence).is_reformist(), || "set cover: invalid".into())?;

    let cl = gen_multicolored_clique(&Graph::complete(3), &[0, 1, 2], 3).map_err(|e| e.to_string())?;
    let cert5 = clique_sequence(&cl, &[0, 1, 2]).map_err(|e| e.to_string())?;
    let expected = cl.instance.num_agents() + 3 + 3;
    ensure(cert5.len() == expected, || format!("clique: {} steps, expected {expected}", cert5.len()))?;
    ensure(verify_sequence(&cl.instance, &cert5.sequence).is_reformist(), || "clique: invalid".into())?;
    Ok(format!("vertex cover 65, set cover {closed}, clique {expected}; all valid"))
}

fn c8_reachability(c: &Corpora) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut total, mut yes) = (0, 0);
    for (k, (inst, mu)) in c.uniqueness.iter().enumerate() {
        let reach = common::brute_reachable(inst, mu.as_slice());
        let all = common::all_envy_free(inst);
        for t in all.choose_multiple(&mut rng, 5) {
            let tau = Matching::new(inst, t.clone()).unwrap();
            let got = is_reachable(inst, mu, &tau).map_err(|e| format!("instance {k}: {e}"))?;
            ensure(got == reach.contains_key(t), || format!("instance {k}: target {t:?} answered {got}"))?;
            total += 1;
            yes += usize::from(got);
        }
    }
    Ok(format!("{total} targets agree with search ({yes} reachable)"))
}

fn c9_preprocess(c: &Corpora) -> Check {
    let mut count = 0;
    for (k, (inst, mu)) in c.uniqueness.iter().chain(&c.short_lists).chain(&c.two_acceptor).enumerate() {
        let rep = preprocess(inst, mu).map_err(|e| format!("instance {k}: {e}"))?;
        let (r, s, m) = (&rep.reduced, &rep.reduced_initial, &rep.reduced_reformist);
        for i in 0..r.num_agents() {
            let prefs = r.prefs(i);
            ensure(prefs[0] == m.item(i) && *prefs.last().unwrap() == s.item(i), || {
                format!("instance {k}: list {i} not trimmed")
            })?;
            ensure(r.prefers(i, m.item(i), s.item(i)), || format!("instance {k}: agent {i} already satisfied"))?;
        }
        let starts: Vec<usize> = s.as_slice().to_vec();
        ensure(m.as_slice().iter().all(|x| !starts.contains(x)), || format!("instance {k}: S and R intersect"))?;
        let before = bfs_shortest(inst, mu, BUDGET).map_err(|e| e.to_string())?.length();
        let after = bfs_shortest(r, s, BUDGET).map_err(|e| e.to_string())?.length();
        ensure(before == after, || format!("instance {k}: bfs {before:?} before, {after:?} after"))?;
        count += 1;
    }
    Ok(format!("{count} instances"))
}

fn main() -> ExitCode {
    let corpora = build_corpora();
    let criteria: Vec<Criterion> = vec![
        ("C1 worked example", 1, Box::new(c1_worked_example)),
        ("C2 uniqueness", 30, Box::new(|| c2_uniqueness(&corpora))),
        ("C3 exponential gap", 10, Box::new(c3_gap)),
        ("C4 short lists", 60, Box::new(|| c4_deg3(&corpora))),
        ("C5 two acceptors", 120, Box::new(|| c5_two_acceptor(&corpora))),
        ("C6 fpt solvers", 120, Box::new(|| c6_fpt(&corpora))),
        ("C7 certificates", 10, Box::new(c7_certificates)),
        ("C8 reachability", 60, Box::new(|| c8_reachability(&corpora))),
        ("C9 preprocessing", u64::MAX, Box::new(|| c9_preprocess(&corpora))),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > Duration::from_secs(limit) => Err(format!("took {took:.2?}, limit {limit} s")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{took:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{took:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
