mod common;

use proptest::prelude::*;
use reformist::engine::{preprocess, reformist_matching};
use reformist::factory::{gen_random, RandomConfig};
use reformist::io::InstanceFile;
use reformist::model::{apply_exchange, envy_pairs, feasible_exchanges, is_envy_free};
use reformist::solvers::bfs_shortest;
use reformist::{
    compute_reformist, is_reachable, solve_auto, verify_sequence, Instance, Matching, NominationPolicy, SolveOptions,
};

fn config() -> impl Strategy<Value = RandomConfig> {
    (1usize..=5, 0usize..=4, 1usize..=5, any::<u64>())
        .prop_map(|(n, extra, len, seed)| RandomConfig::new(n, n + extra, len, seed))
}

fn instance() -> impl Strategy<Value = (Instance, Matching)> {
    config().prop_filter_map("generator gave up", |cfg| gen_random(&cfg).ok())
}

fn policy() -> impl Strategy<Value = NominationPolicy> {
    prop_oneof![
        Just(NominationPolicy::BestFirst),
        Just(NominationPolicy::RoundRobin),
        any::<u64>().prop_map(|seed| NominationPolicy::Random { seed }),
        Just((0..5).collect::<Vec<usize>>()).prop_shuffle().prop_map(NominationPolicy::FixedOrder),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn every_policy_reaches_the_same_matching((inst, mu) in instance(), a in policy(), b in policy()) {
        let (s1, q1) = compute_reformist(&inst, &mu, &a).unwrap();
        let (s2, q2) = compute_reformist(&inst, &mu, &b).unwrap();
        prop_assert_eq!(&s1, &s2);
        prop_assert!(verify_sequence(&inst, &q1).is_reformist());
        prop_assert!(verify_sequence(&inst, &q2).is_reformist());
    }

    #[test]
    fn agents_only_move_upward((inst, mu) in instance(), p in policy()) {
        let (sigma, seq) = compute_reformist(&inst, &mu, &p).unwrap();
        for s in &seq.steps {
            prop_assert!(inst.prefers(s.agent, s.to_item, s.from_item));
        }
        for i in 0..inst.num_agents() {
            prop_assert!(inst.rank(i, sigma.item(i)) <= inst.rank(i, mu.item(i)));
        }
    }

    #[test]
    fn exchanges_agree_with_scan((inst, mu) in instance()) {
        let lib: Vec<(usize, usize)> = feasible_exchanges(&inst, &mu).unwrap().iter().map(|s| (s.agent, s.to_item)).collect();
        prop_assert_eq!(lib, common::brute_steps(&inst, mu.as_slice()));
    }

    #[test]
    fn envy_free_iff_no_envy_pairs((inst, _) in instance(), pick in any::<prop::sample::Index>()) {
        let all = every_matching(&inst);
        prop_assume!(!all.is_empty());
        let held = pick.get(&all).clone();
        let m = Matching::new(&inst, held.clone()).unwrap();
        let mut pairs = envy_pairs(&inst, &m).unwrap();
        prop_assert_eq!(is_envy_free(&inst, &m).unwrap(), pairs.is_empty());
        let mut expected = common::brute_envy(&inst, &held);
        pairs.sort_unstable();
        expected.sort_unstable();
        prop_assert_eq!(pairs, expected);
    }

    #[test]
    fn applying_a_feasible_exchange_keeps_envy_freeness((inst, mu) in instance()) {
        for step in feasible_exchanges(&inst, &mu).unwrap() {
            let next = apply_exchange(&inst, &mu, &step).unwrap();
            prop_assert!(is_envy_free(&inst, &next).unwrap());
        }
    }

    #[test]
    fn preprocessing_invariants((inst, mu) in instance()) {
        let rep = preprocess(&inst, &mu).unwrap();
        let sigma = reformist_matching(&inst, &mu).unwrap();
        prop_assert_eq!(&rep.reformist, &sigma);
        for i in 0..rep.reduced.num_agents() {
            let prefs = rep.reduced.prefs(i);
            prop_assert!(prefs.len() >= 2);
            prop_assert_eq!(prefs[0], rep.reduced_reformist.item(i));
            prop_assert_eq!(*prefs.last().unwrap(), rep.reduced_initial.item(i));
        }
        let full = solve_auto(&inst, &mu, &SolveOptions::default()).unwrap().length().unwrap();
        let reduced = bfs_shortest(&rep.reduced, &rep.reduced_initial, 1 << 20).unwrap().length().unwrap();
        prop_assert_eq!(full, reduced);
        prop_assert!(full >= rep.reduced.num_agents());
    }

    #[test]
    fn reachability_agrees_with_search((inst, mu) in instance(), pick in any::<prop::sample::Index>()) {
        let targets = common::all_envy_free(&inst);
        let t = pick.get(&targets).clone();
        let reach = common::brute_reachable(&inst, mu.as_slice());
        let tau = Matching::new(&inst, t.clone()).unwrap();
        prop_assert_eq!(is_reachable(&inst, &mu, &tau).unwrap(), reach.contains_key(&t));
    }

    #[test]
    fn instance_files_round_trip((inst, mu) in instance()) {
        let text = InstanceFile::from_model(&inst, &mu).to_text();
        let parsed = InstanceFile::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_text(), text.clone());
        let (inst2, mu2) = parsed.to_model().unwrap();
        prop_assert_eq!(inst2, inst);
        prop_assert_eq!(mu2, mu);
    }
}

fn every_matching(inst: &Instance) -> Vec<Vec<usize>> {
    fn go(inst: &Instance, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == inst.num_agents() {
            out.push(cur.clone());
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
