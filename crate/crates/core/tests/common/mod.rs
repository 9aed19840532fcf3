//! Brute-force oracles. They only read preference lists and never call the
//! library's envy or step logic.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;

use reformist::engine::preprocess;
use reformist::factory::{gen_random, RandomConfig};
use reformist::solvers::GeneralizedInstance;
use reformist::{Instance, InstanceBuilder, Matching};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn ex1() -> (Instance, Matching) {
    let mut b = InstanceBuilder::new();
    for x in ["x", "y", "p", "q", "r"] {
        b.item(x);
    }
    b.agent_named("1", &["p", "r", "q", "x"]);
    b.agent_named("2", &["q", "p", "y"]);
    let inst = b.build().unwrap();
    let mu = Matching::from_names(&inst, &[("1", "x"), ("2", "y")]).unwrap().unwrap();
    (inst, mu)
}

pub fn four_agents() -> (Instance, Matching) {
    let mut b = InstanceBuilder::new();
    for x in ["a", "b", "c", "d", "e", "f", "g"] {
        b.item(x);
    }
    b.agent_named("1", &["a", "b", "c", "d", "e", "f", "g"]);
    b.agent_named("2", &["f", "d", "a", "g", "e"]);
    b.agent_named("3", &["b", "g", "a", "c"]);
    b.agent_named("4", &["d", "c", "g", "e", "f"]);
    let inst = b.build().unwrap();
    let mu = Matching::from_names(&inst, &[("1", "b"), ("2", "d"), ("3", "g"), ("4", "e")]).unwrap().unwrap();
    (inst, mu)
}

pub fn names(inst: &Instance, held: &[usize]) -> Vec<String> {
    held.iter().map(|&x| inst.item_name(x).to_string()).collect()
}

fn pos(inst: &Instance, i: usize, x: usize) -> Option<usize> {
    inst.prefs(i).iter().position(|&y| y == x)
}

/// `(i, j)` such that `i` ranks `j`'s item above her own.
pub fn brute_envy(inst: &Instance, held: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..held.len() {
        let own = pos(inst, i, held[i]).expect("held item is acceptable");
        for (j, &y) in held.iter().enumerate() {
            if i != j && pos(inst, i, y).is_some_and(|p| p < own) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Every improvement step `(agent, item)`: agent ascending, item best first.
pub fn brute_steps(inst: &Instance, held: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..held.len() {
        let own = pos(inst, i, held[i]).unwrap();
        for &y in &inst.prefs(i)[..own] {
            if held.contains(&y) {
                continue;
            }
            let mut next = held.to_vec();
            next[i] = y;
            if brute_envy(inst, &next).is_empty() {
                out.push((i, y));
            }
        }
    }
    out
}

/// Distances from `held` to every matching reachable by improvement steps.
pub fn brute_reachable(inst: &Instance, held: &[usize]) -> HashMap<Vec<usize>, usize> {
    let mut dist = HashMap::new();
    dist.insert(held.to_vec(), 0);
    let mut queue = VecDeque::from([held.to_vec()]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        for (i, y) in brute_steps(inst, &cur) {
            let mut next = cur.clone();
            next[i] = y;
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// The terminal matchings among the reachable ones with their distances.
pub fn brute_terminals(inst: &Instance, held: &[usize]) -> Vec<(Vec<usize>, usize)> {
    let mut t: Vec<_> =
        brute_reachable(inst, held).into_iter().filter(|(m, _)| brute_steps(inst, m).is_empty()).collect();
    t.sort();
    t
}

/// Reformist matching and shortest sequence length, asserting uniqueness.
pub fn brute_reformist(inst: &Instance, held: &[usize]) -> (Vec<usize>, usize) {
    let t = brute_terminals(inst, held);
    assert_eq!(t.len(), 1, "terminal matching must be unique");
    t.into_iter().next().unwrap()
}

/// All envy-free matchings, by depth-first assignment.
pub fn all_envy_free(inst: &Instance) -> Vec<Vec<usize>> {
    fn go(inst: &Instance, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == inst.num_agents() {
            if brute_envy(inst, cur).is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        for &x in inst.prefs(i) {
            if !cur.contains(&x) {
                cur.push(x);
                go(inst, i + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(inst, 0, &mut Vec::new(), &mut out);
    out
}

/// Shortest sequence in the target-set/partition model by exhaustive search, or
/// `None` when no satisfactory matching is reachable.
pub fn brute_general(g: &GeneralizedInstance) -> Option<usize> {
    let inst = &g.base;
    let n = inst.num_agents();
    let mut group = vec![0; n];
    for (a, members) in g.partition.iter().enumerate() {
        for &i in members {
            group[i] = a;
        }
    }
    let in_target = |i: usize, x: usize| pos(inst, i, x).unwrap() <= pos(inst, i, g.targets[i]).unwrap();
    let sat = |held: &[usize]| -> Vec<bool> {
        g.partition.iter().map(|m| m.iter().any(|&i| in_target(i, held[i]))).collect()
    };
    let ok = |held: &[usize]| {
        let s = sat(held);
        brute_envy(inst, held).into_iter().all(|(i, j)| group[i] != group[j] && s[group[i]])
    };
    let start = g.initial.as_slice().to_vec();
    assert!(ok(&start));
    let mut dist = HashMap::from([(start.clone(), 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        if sat(&cur).into_iter().all(|s| s) {
            return Some(d);
        }
        for i in 0..n {
            let own = pos(inst, i, cur[i]).unwrap();
            for &y in &inst.prefs(i)[..own] {
                if cur.contains(&y) {
                    continue;
                }
                let mut next = cur.clone();
                next[i] = y;
                if ok(&next) && !dist.contains_key(&next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    None
}

/// Random instances with at least one agent left after preprocessing, returned
/// in reduced form.
pub fn reduced_corpus(count: usize, seed0: u64, mk: impl Fn(u64) -> RandomConfig) -> Vec<(Instance, Matching)> {
    let mut out = Vec::new();
    let mut seed = seed0;
    while out.len() < count {
        let cfg = mk(seed);
        seed += 1;
        let (inst, mu) = gen_random(&cfg).unwrap();
        let rep = preprocess(&inst, &mu).unwrap();
        if rep.reduced.num_agents() > 0 {
            out.push((rep.reduced, rep.reduced_initial));
        }
    }
    out
}
