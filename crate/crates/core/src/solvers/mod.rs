//! Shortest reformist sequences.
//!
//! Every solver except [`bfs::bfs_shortest`] expects a preprocessed instance
//! (see [`crate::engine::preprocess`]). [`solve`] and [`solve_auto`] take care of
//! preprocessing and translate the witness back to original ids.

pub mod bfs;
pub mod deg3;
pub mod fpt_k;
pub mod fpt_length;
pub mod general;

use std::fmt;

use thiserror::Error;

use crate::engine::{preprocess, reformist_matching, EngineError, PreprocessReport};
use crate::model::{Instance, ItemId, Matching, ModelError, ReformSequence};

pub use bfs::bfs_shortest;
pub use deg3::shortest_deg3;
pub use fpt_k::{fpt_by_intermediate, intermediate_items};
pub use fpt_length::fpt_by_length;
pub use general::{shortest_two_acceptor, solve_general_ln, GeneralizedInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Auto,
    Bfs,
    Deg3,
    TwoAcceptor,
    FptLength,
    FptK,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Bfs => "bfs",
            Algorithm::Deg3 => "deg3",
            Algorithm::TwoAcceptor => "two-acceptor",
            Algorithm::FptLength => "fpt-length",
            Algorithm::FptK => "fpt-k",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Algorithm::Auto,
            Algorithm::Bfs,
            Algorithm::Deg3,
            Algorithm::TwoAcceptor,
            Algorithm::FptLength,
            Algorithm::FptK,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Maximum number of stored states for the exhaustive search.
    pub bfs_state_budget: usize,
    /// Largest intermediate item count the auto dispatcher hands to fpt-k.
    pub k_cap: usize,
    /// Decision mode: report infeasible unless a sequence of at most this length exists.
    pub max_length: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { bfs_state_budget: 2_000_000, k_cap: 16, max_length: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Search nodes expanded (recursive calls for the recursive solvers).
    pub nodes: u64,
    pub max_depth: usize,
    /// Recursion measure at every call of the generalized solver.
    pub measure_trace: Vec<usize>,
    pub solver: Option<Algorithm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    /// Shortest witness, or `None` when no sequence fits the requested bound.
    pub sequence: Option<ReformSequence>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn length(&self) -> Option<usize> {
        self.sequence.as_ref().map(ReformSequence::len)
    }

    pub fn is_feasible(&self) -> bool {
        self.sequence.is_some()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{solver}: precondition violated: {reason}")]
    Precondition { solver: Algorithm, reason: String },
    #[error("{solver}: state budget of {limit} exceeded")]
    Budget { solver: Algorithm, limit: usize },
    #[error("no exact solver applicable within budgets: {}", fmt_reasons(.0))]
    NoSolverApplicable(Vec<(Algorithm, String)>),
    #[error("{solver}: internal error: {detail}")]
    Internal { solver: Algorithm, detail: String },
}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Engine(EngineError::Model(e))
    }
}

fn fmt_reasons(reasons: &[(Algorithm, String)]) -> String {
    reasons.iter().map(|(a, r)| format!("{a}: {r}")).collect::<Vec<_>>().join("; ")
}

/// Checks that every list runs from the reformist item down to the initial item
/// and that no agent starts at her reformist item. Returns the reformist matching.
pub fn check_preprocessed(inst: &Instance, mu: &Matching, solver: Algorithm) -> Result<Matching, SolveError> {
    let sigma = reformist_matching(inst, mu)?;
    for i in 0..inst.num_agents() {
        let prefs = inst.prefs(i);
        let fail = |reason: String| Err(SolveError::Precondition { solver, reason });
        if sigma.item(i) == mu.item(i) {
            return fail(format!("agent {} never moves", inst.agent_name(i)));
        }
        if prefs.first() != Some(&sigma.item(i)) || prefs.last() != Some(&mu.item(i)) {
            return fail(format!("list of agent {} is not trimmed to [reformist, initial]", inst.agent_name(i)));
        }
    }
    Ok(sigma)
}

/// Product of list lengths, an upper bound on the number of search states.
fn state_estimate(inst: &Instance) -> Option<usize> {
    (0..inst.num_agents()).try_fold(1usize, |acc, i| acc.checked_mul(inst.prefs(i).len()))
}

fn run_on_reduced(rep: &PreprocessReport, algo: Algorithm, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let inst = &rep.reduced;
    let mu = &rep.reduced_initial;
    let mut res = match algo {
        Algorithm::Bfs => bfs_shortest(inst, mu, opts.bfs_state_budget)?,
        Algorithm::Deg3 => shortest_deg3(inst, mu)?,
        Algorithm::TwoAcceptor => shortest_two_acceptor(inst, mu)?,
        Algorithm::FptK => fpt_by_intermediate(inst, mu)?,
        Algorithm::FptLength => match opts.max_length {
            Some(l) => fpt_by_length(inst, mu, l)?,
            None => iterative_deepening(inst, mu)?,
        },
        Algorithm::Auto => unreachable!("resolved by the caller"),
    };
    res.stats.solver = Some(algo);
    if let (Some(l), Some(len)) = (opts.max_length, res.length()) {
        if len > l {
            res.sequence = None;
        }
    }
    res.sequence = res.sequence.map(|s| rep.lift(&s));
    Ok(res)
}

fn iterative_deepening(inst: &Instance, mu: &Matching) -> Result<SolveResult, SolveError> {
    let n = inst.num_agents();
    let mut nodes = 0;
    for l in n..=(n * inst.num_items()).max(n) {
        let mut res = fpt_by_length(inst, mu, l)?;
        nodes += res.stats.nodes;
        if res.is_feasible() {
            res.stats.nodes = nodes;
            return Ok(res);
        }
    }
    Err(SolveError::Internal { solver: Algorithm::FptLength, detail: "no sequence within the step bound".into() })
}

/// Picks the first applicable exact solver for a preprocessed instance.
pub fn choose_algorithm(inst: &Instance, mu: &Matching, opts: &SolveOptions) -> Result<Algorithm, SolveError> {
    let mut reasons = Vec::new();
    if inst.max_list_len() <= 3 {
        return Ok(Algorithm::Deg3);
    }
    reasons.push((Algorithm::Deg3, format!("longest list has {} items", inst.max_list_len())));
    if inst.max_acceptors() <= 2 {
        return Ok(Algorithm::TwoAcceptor);
    }
    reasons.push((Algorithm::TwoAcceptor, format!("some item has {} acceptors", inst.max_acceptors())));
    let k = intermediate_items(inst, mu, &reformist_matching(inst, mu)?).len();
    if k <= opts.k_cap {
        return Ok(Algorithm::FptK);
    }
    reasons.push((Algorithm::FptK, format!("|K| = {k} exceeds cap {}", opts.k_cap)));
    match state_estimate(inst) {
        Some(s) if s <= opts.bfs_state_budget => return Ok(Algorithm::Bfs),
        _ => reasons.push((Algorithm::Bfs, format!("state estimate exceeds budget {}", opts.bfs_state_budget))),
    }
    if inst.num_agents() <= 12 || opts.max_length.is_some_and(|l| l <= 12) {
        return Ok(Algorithm::FptLength);
    }
    reasons.push((Algorithm::FptLength, format!("{} agents is beyond the length cap", inst.num_agents())));
    Err(SolveError::NoSolverApplicable(reasons))
}

/// Preprocesses, dispatches to the first applicable exact solver and lifts the result.
pub fn solve_auto(inst: &Instance, mu: &Matching, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    solve(inst, mu, Algorithm::Auto, opts)
}

/// Preprocesses and runs `algo` (resolving `Auto` first), returning a witness in original ids.
pub fn solve(inst: &Instance, mu: &Matching, algo: Algorithm, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let rep = preprocess(inst, mu)?;
    let algo = match algo {
        Algorithm::Auto => choose_algorithm(&rep.reduced, &rep.reduced_initial, opts)?,
        a => a,
    };
    run_on_reduced(&rep, algo, opts)
}

/// Items with a given agent's rank, used by several solvers.
pub(crate) fn rank_of(inst: &Instance, i: usize, x: ItemId) -> usize {
    inst.rank(i, x).expect("item on the agent's list")
}
