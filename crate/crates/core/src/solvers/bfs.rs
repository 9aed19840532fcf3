//! Exhaustive breadth-first search over envy-free matchings.

use std::collections::{HashMap, VecDeque};

use super::{rank_of, Algorithm, SolveError, SolveResult, SolveStats};
use crate::engine::reformist_matching;
use crate::model::{Board, ExchangeStep, Instance, Matching, ReformSequence};

/// Exact shortest reformist sequence by BFS. Successors are generated in
/// (agent ascending, item best first) order and the first discovery of a state
/// fixes its parent, so the witness is the lexicographically smallest shortest one.
///
/// Fails with [`SolveError::Budget`] once more than `budget` states are stored.
pub fn bfs_shortest(inst: &Instance, mu: &Matching, budget: usize) -> Result<SolveResult, SolveError> {
    let sigma = reformist_matching(inst, mu)?;
    let encode = |items: &[usize]| -> Box<[u32]> {
        items.iter().enumerate().map(|(i, &x)| rank_of(inst, i, x) as u32).collect()
    };
    let target = encode(sigma.as_slice());

    let mut states: Vec<Vec<usize>> = vec![mu.as_slice().to_vec()];
    let mut parent: Vec<Option<(usize, ExchangeStep)>> = vec![None];
    let mut depth: Vec<usize> = vec![0];
    let mut seen: HashMap<Box<[u32]>, usize> = HashMap::new();
    seen.insert(encode(mu.as_slice()), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut nodes = 0u64;

    let mut found = (encode(mu.as_slice()) == target).then_some(0);
    while found.is_none() {
        let Some(u) = queue.pop_front() else { break };
        nodes += 1;
        let board = Board::new(inst, &Matching::from_vec_unchecked(states[u].clone()));
        'agents: for i in 0..inst.num_agents() {
            for y in board.moves(i) {
                let mut next = states[u].clone();
                next[i] = y;
                let key = encode(&next);
                if seen.contains_key(&key) {
                    continue;
                }
                if states.len() >= budget {
                    return Err(SolveError::Budget { solver: Algorithm::Bfs, limit: budget });
                }
                let v = states.len();
                let done = key == target;
                seen.insert(key, v);
                states.push(next);
                parent.push(Some((u, ExchangeStep::new(i, states[u][i], y))));
                depth.push(depth[u] + 1);
                queue.push_back(v);
                if done {
                    found = Some(v);
                    break 'agents;
                }
            }
        }
    }

    let Some(mut v) = found else {
        return Err(SolveError::Internal { solver: Algorithm::Bfs, detail: "reformist matching not reached".into() });
    };
    let max_depth = depth[v];
    let mut steps = Vec::new();
    while let Some((u, step)) = parent[v] {
        steps.push(step);
        v = u;
    }
    steps.reverse();
    Ok(SolveResult {
        sequence: Some(ReformSequence { initial: mu.clone(), steps }),
        stats: SolveStats { nodes, max_depth, solver: Some(Algorithm::Bfs), ..Default::default() },
    })
}
