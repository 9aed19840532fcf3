//! Lists of length at most three: every agent jumps straight to her reformist item.

use super::{check_preprocessed, Algorithm, SolveError, SolveResult, SolveStats};
use crate::model::{Board, Instance, Matching, ReformSequence};

/// Shortest reformist sequence when every list has at most three items.
///
/// Agent `i` waits for agent `j` when `i`'s reformist item is `j`'s middle item,
/// since `j` would envy `i` otherwise. The agents are moved in sink-first order
/// of that waiting digraph, lowest index first among current sinks.
pub fn shortest_deg3(inst: &Instance, mu: &Matching) -> Result<SolveResult, SolveError> {
    let sigma = check_preprocessed(inst, mu, Algorithm::Deg3)?;
    let n = inst.num_agents();
    if let Some(i) = (0..n).find(|&i| inst.prefs(i).len() > 3) {
        return Err(SolveError::Precondition {
            solver: Algorithm::Deg3,
            reason: format!("agent {} has {} acceptable items", inst.agent_name(i), inst.prefs(i).len()),
        });
    }
    let middle: Vec<Option<usize>> = (0..n).map(|i| (inst.prefs(i).len() == 3).then(|| inst.prefs(i)[1])).collect();
    // waits_for[i] = agents j with sigma(i) = b(j)
    let waits_for: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| j != i && middle[j] == Some(sigma.item(i))).collect()).collect();

    let mut board = Board::new(inst, mu);
    let mut moved = vec![false; n];
    let mut seq = ReformSequence::new(mu.clone());
    let mut nodes = 0u64;
    while seq.len() < n {
        nodes += 1;
        let sink = (0..n).find(|&i| !moved[i] && waits_for[i].iter().all(|&j| moved[j]));
        let Some(i) = sink else {
            return Err(SolveError::Internal { solver: Algorithm::Deg3, detail: "waiting digraph has a cycle".into() });
        };
        if !board.can_move(i, sigma.item(i)) {
            return Err(SolveError::Internal {
                solver: Algorithm::Deg3,
                detail: format!("direct move of agent {} is not envy-free", inst.agent_name(i)),
            });
        }
        seq.steps.push(board.apply(i, sigma.item(i)));
        moved[i] = true;
    }
    Ok(SolveResult {
        sequence: Some(seq),
        stats: SolveStats { nodes, max_depth: n, solver: Some(Algorithm::Deg3), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InstanceBuilder;

    #[test]
    fn waits_for_middle_item_holder() {
        let mut b = InstanceBuilder::new();
        b.agent_named("1", &["r1", "r2", "s1"]);
        b.agent_named("2", &["r2", "s2"]);
        let inst = b.build().unwrap();
        let mu = Matching::from_names(&inst, &[("1", "s1"), ("2", "s2")]).unwrap().unwrap();
        let seq = shortest_deg3(&inst, &mu).unwrap().sequence.unwrap();
        let order: Vec<usize> = seq.steps.iter().map(|s| s.agent).collect();
        assert_eq!(order, [0, 1]);
        assert_eq!(inst.item_name(seq.steps[0].to_item), "r1");
    }

    #[test]
    fn rejects_long_lists_and_unreduced_input() {
        let mut b = InstanceBuilder::new();
        b.agent_named("1", &["a", "b", "c", "d"]);
        let inst = b.build().unwrap();
        let mu = Matching::from_names(&inst, &[("1", "d")]).unwrap().unwrap();
        assert!(matches!(shortest_deg3(&inst, &mu), Err(SolveError::Precondition { .. })));

        let mut b = InstanceBuilder::new();
        b.agent_named("1", &["a", "b", "c"]);
        let inst = b.build().unwrap();
        let mu = Matching::from_names(&inst, &[("1", "b")]).unwrap().unwrap();
        assert!(matches!(shortest_deg3(&inst, &mu), Err(SolveError::Precondition { .. })));
    }
}
