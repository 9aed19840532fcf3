//! Branching on the nominated agent, bounded by the sequence length.

use std::collections::HashMap;

use super::{check_preprocessed, Algorithm, SolveError, SolveResult, SolveStats};
use crate::model::{Board, ExchangeStep, Instance, ItemId, Matching, ReformSequence};

struct Search<'a> {
    inst: &'a Instance,
    sigma: Vec<ItemId>,
    /// Largest remaining budget for which a state is known to fail.
    failed: HashMap<Vec<ItemId>, usize>,
    path: Vec<ExchangeStep>,
    best: Option<Vec<ExchangeStep>>,
    limit: usize,
    nodes: u64,
    max_depth: usize,
}

impl Search<'_> {
    fn unfinished(&self, held: &[ItemId]) -> usize {
        held.iter().zip(&self.sigma).filter(|(a, b)| a != b).count()
    }

    fn dfs(&mut self, board: &mut Board<'_>) {
        let held = board.held_items().to_vec();
        let depth = self.path.len();
        self.max_depth = self.max_depth.max(depth);
        if held == self.sigma {
            self.best = Some(self.path.clone());
            self.limit = depth.saturating_sub(1);
            return;
        }
        if depth > self.limit {
            return;
        }
        let remaining = self.limit - depth;
        if remaining < self.unfinished(&held) {
            return;
        }
        if self.failed.get(&held).is_some_and(|&r| r >= remaining) {
            return;
        }
        self.nodes += 1;
        for i in 0..self.inst.num_agents() {
            let Some(y) = board.best_move(i) else { continue };
            let step = board.apply(i, y);
            self.path.push(step);
            self.dfs(board);
            self.path.pop();
            board.apply(i, step.from_item);
        }
        // Anything found below has tightened the limit, so nothing within it remains.
        if self.limit >= depth {
            let e = self.failed.entry(held).or_insert(0);
            *e = (*e).max(self.limit - depth);
        }
    }
}

/// Decides whether a reformist sequence of length at most `max_len` exists and
/// returns a shortest one if so. Each branch nominates an agent and moves her to
/// her most preferred envy-free unassigned item.
pub fn fpt_by_length(inst: &Instance, mu: &Matching, max_len: usize) -> Result<SolveResult, SolveError> {
    let sigma = check_preprocessed(inst, mu, Algorithm::FptLength)?;
    let n = inst.num_agents();
    let stats =
        |nodes, max_depth| SolveStats { nodes, max_depth, solver: Some(Algorithm::FptLength), ..Default::default() };
    if n > max_len {
        return Ok(SolveResult { sequence: None, stats: stats(0, 0) });
    }
    let mut search = Search {
        inst,
        sigma: sigma.into_vec(),
        failed: HashMap::new(),
        path: Vec::new(),
        best: None,
        limit: max_len,
        nodes: 0,
        max_depth: 0,
    };
    let mut board = Board::new(inst, mu);
    search.dfs(&mut board);
    let bound = (n as u64).checked_pow(max_len as u32).unwrap_or(u64::MAX);
    if search.nodes > bound {
        return Err(SolveError::Internal {
            solver: Algorithm::FptLength,
            detail: format!("expanded {} nodes, more than n^l = {bound}", search.nodes),
        });
    }
    Ok(SolveResult {
        sequence: search.best.map(|steps| ReformSequence { initial: mu.clone(), steps }),
        stats: stats(search.nodes, search.max_depth),
    })
}
