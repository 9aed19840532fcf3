//! Iterative improvement to the reformist matching, preprocessing, the
//! reachability test between envy-free matchings and sequence verification.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    require_envy_free, AgentId, Board, ExchangeError, ExchangeStep, Instance, ItemId, Matching, ModelError,
    ReformSequence,
};

/// Which agent is nominated next while improving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NominationPolicy {
    /// Priority order: always nominate the earliest listed agent that can move.
    /// Agents missing from the list follow in ascending order.
    FixedOrder(Vec<AgentId>),
    /// Cycle through agents `0..n`, skipping agents that cannot move.
    RoundRobin,
    /// Uniformly among the agents that can move, from a seeded generator.
    Random { seed: u64 },
    /// Always the lowest-index agent that can move.
    BestFirst,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal error: improvement did not terminate within {bound} steps")]
    StepBoundExceeded { bound: usize },
}

/// Repeatedly moves a nominated agent to her most preferred legal item until no
/// agent can move. Returns the terminal (reformist) matching and the steps taken.
pub fn compute_reformist(
    inst: &Instance,
    mu: &Matching,
    policy: &NominationPolicy,
) -> Result<(Matching, ReformSequence), EngineError> {
    require_envy_free(inst, mu)?;
    let n = inst.num_agents();
    let bound = inst.num_items() * n;
    let mut board = Board::new(inst, mu);
    let mut seq = ReformSequence::new(mu.clone());

    let priority: Vec<AgentId> = match policy {
        NominationPolicy::FixedOrder(order) => {
            let mut seen = vec![false; n];
            let mut p = Vec::with_capacity(n);
            for i in order.iter().copied().chain(0..n).filter(|&i| i < n) {
                if !seen[i] {
                    seen[i] = true;
                    p.push(i);
                }
            }
            p
        }
        _ => (0..n).collect(),
    };
    let mut rng = match policy {
        NominationPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut cursor = 0usize;

    loop {
        let nominated = match policy {
            NominationPolicy::FixedOrder(_) | NominationPolicy::BestFirst => {
                priority.iter().copied().find_map(|i| board.best_move(i).map(|y| (i, y)))
            }
            NominationPolicy::RoundRobin => (0..n).map(|k| (cursor + k) % n.max(1)).find_map(|i| {
                if i < n {
                    board.best_move(i).map(|y| (i, y))
                } else {
                    None
                }
            }),
            NominationPolicy::Random { .. } => {
                let movable: Vec<(AgentId, ItemId)> =
                    (0..n).filter_map(|i| board.best_move(i).map(|y| (i, y))).collect();
                movable.choose(rng.as_mut().expect("seeded")).copied()
            }
        };
        let Some((i, y)) = nominated else { break };
        if seq.steps.len() == bound {
            return Err(EngineError::StepBoundExceeded { bound });
        }
        seq.steps.push(board.apply(i, y));
        cursor = i + 1;
    }
    Ok((board.matching(), seq))
}

/// The reformist matching, with the lowest-index nomination order.
pub fn reformist_matching(inst: &Instance, mu: &Matching) -> Result<Matching, EngineError> {
    compute_reformist(inst, mu, &NominationPolicy::BestFirst).map(|(s, _)| s)
}

/// Result of reducing an instance so that every list lies between the initial
/// and reformist items and no agent is already at her reformist item.
#[derive(Clone, Debug)]
pub struct PreprocessReport {
    pub reduced: Instance,
    pub reduced_initial: Matching,
    pub reduced_reformist: Matching,
    /// Reformist matching of the original instance.
    pub reformist: Matching,
    pub original_initial: Matching,
    /// Original agents dropped because they never move.
    pub removed_agents: Vec<AgentId>,
    /// Original items absent from the reduced instance.
    pub removed_items: Vec<ItemId>,
    /// Per original agent, items deleted from her list.
    pub trimmed: Vec<Vec<ItemId>>,
    /// Reduced agent id → original agent id.
    pub agent_map: Vec<AgentId>,
    /// Reduced item id → original item id.
    pub item_map: Vec<ItemId>,
}

impl PreprocessReport {
    /// Translates a sequence over the reduced instance into original ids,
    /// starting from the original initial matching.
    pub fn lift(&self, reduced: &ReformSequence) -> ReformSequence {
        ReformSequence {
            initial: self.original_initial.clone(),
            steps: reduced
                .steps
                .iter()
                .map(|s| {
                    ExchangeStep::new(self.agent_map[s.agent], self.item_map[s.from_item], self.item_map[s.to_item])
                })
                .collect(),
        }
    }

    /// Original agent id → reduced id, if the agent survived.
    pub fn reduced_agent(&self, original: AgentId) -> Option<AgentId> {
        self.agent_map.iter().position(|&a| a == original)
    }
}

/// Applies the list-trimming and removal rules to a fixed point.
pub fn preprocess(inst: &Instance, mu: &Matching) -> Result<PreprocessReport, EngineError> {
    let sigma = reformist_matching(inst, mu)?;
    let n = inst.num_agents();
    let m = inst.num_items();
    let mut lists: Vec<Vec<ItemId>> = (0..n).map(|i| inst.prefs(i).to_vec()).collect();
    let mut alive = vec![true; n];
    let mut item_alive = vec![true; m];

    loop {
        let mut changed = false;
        // Items below the initial item are never envied by this agent.
        for i in (0..n).filter(|&i| alive[i]) {
            let before = lists[i].len();
            lists[i].retain(|&x| !inst.prefers(i, mu.item(i), x));
            changed |= lists[i].len() != before;
        }
        // Items above some reformist item can never be held by anyone.
        for i in (0..n).filter(|&i| alive[i]) {
            for &x in &lists[i] {
                if inst.prefers(i, x, sigma.item(i)) && item_alive[x] {
                    item_alive[x] = false;
                    changed = true;
                }
            }
        }
        // Agents that never move keep their item for good.
        for i in 0..n {
            if alive[i] && sigma.item(i) == mu.item(i) {
                alive[i] = false;
                item_alive[mu.item(i)] = false;
                changed = true;
            }
        }
        for i in (0..n).filter(|&i| alive[i]) {
            lists[i].retain(|&x| item_alive[x]);
        }
        if !changed {
            break;
        }
    }

    let agent_map: Vec<AgentId> = (0..n).filter(|&i| alive[i]).collect();
    let mut used = vec![false; m];
    for &i in &agent_map {
        for &x in &lists[i] {
            used[x] = true;
        }
    }
    let item_map: Vec<ItemId> = (0..m).filter(|&x| used[x]).collect();
    let mut new_id = vec![usize::MAX; m];
    for (k, &x) in item_map.iter().enumerate() {
        new_id[x] = k;
    }
    let reduced = Instance::from_parts(
        item_map.iter().map(|&x| inst.item_name(x).to_string()).collect(),
        agent_map.iter().map(|&i| inst.agent_name(i).to_string()).collect(),
        agent_map.iter().map(|&i| lists[i].iter().map(|&x| new_id[x]).collect()).collect(),
    )
    .expect("reduction of a valid instance is valid");
    let reduced_initial = Matching::new(&reduced, agent_map.iter().map(|&i| new_id[mu.item(i)]).collect())?;
    let reduced_reformist = Matching::new(&reduced, agent_map.iter().map(|&i| new_id[sigma.item(i)]).collect())?;
    let trimmed = (0..n)
        .map(|i| {
            if alive[i] {
                inst.prefs(i).iter().copied().filter(|x| !lists[i].contains(x)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();

    Ok(PreprocessReport {
        reduced,
        reduced_initial,
        reduced_reformist,
        reformist: sigma,
        original_initial: mu.clone(),
        removed_agents: (0..n).filter(|&i| !alive[i]).collect(),
        removed_items: (0..m).filter(|&x| !used[x]).collect(),
        trimmed,
        agent_map,
        item_map,
    })
}

/// Whether `tau` can be reached from `mu` by improvement steps. A target with
/// envy is never reachable; a target that is not a matching of `inst` is an error.
pub fn is_reachable(inst: &Instance, mu: &Matching, tau: &Matching) -> Result<bool, EngineError> {
    require_envy_free(inst, mu)?;
    match require_envy_free(inst, tau) {
        Err(ModelError::NotEnvyFree { .. }) => return Ok(false),
        other => other?,
    }
    let n = inst.num_agents();
    if (0..n).any(|i| inst.prefers(i, mu.item(i), tau.item(i))) {
        return Ok(false);
    }
    let mut deleted = vec![false; inst.num_items()];
    for i in 0..n {
        for &x in inst.prefs(i) {
            if inst.prefers(i, x, tau.item(i)) {
                deleted[x] = true;
            }
        }
    }
    let restricted = inst.retain(|_, x| !deleted[x]);
    Ok(reformist_matching(&restricted, mu)? == *tau)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyFailure {
    /// The initial matching is invalid or not envy-free.
    Initial(ModelError),
    /// Step `index` is not an improvement step of its predecessor.
    Step { index: usize, error: ExchangeError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub failure: Option<VerifyFailure>,
    /// Matching reached after the last valid step.
    pub reached: Option<Matching>,
    /// True when the reached matching admits no further step.
    pub terminal: bool,
}

impl VerifyReport {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }

    /// Valid and ends at the reformist matching.
    pub fn is_reformist(&self) -> bool {
        self.is_valid() && self.terminal
    }

    pub fn failing_step(&self) -> Option<usize> {
        match &self.failure {
            Some(VerifyFailure::Step { index, .. }) => Some(*index),
            _ => None,
        }
    }
}

/// Replays `seq` and reports the first step that is not an improvement step.
pub fn verify_sequence(inst: &Instance, seq: &ReformSequence) -> VerifyReport {
    if let Err(e) = require_envy_free(inst, &seq.initial) {
        return VerifyReport { failure: Some(VerifyFailure::Initial(e)), reached: None, terminal: false };
    }
    let mut board = Board::new(inst, &seq.initial);
    let mut failure = None;
    for (index, step) in seq.steps.iter().enumerate() {
        if let Err(error) = board.try_apply(step) {
            failure = Some(VerifyFailure::Step { index, error });
            break;
        }
    }
    let terminal = (0..inst.num_agents()).all(|i| board.best_move(i).is_none());
    VerifyReport { failure, reached: Some(board.matching()), terminal }
}
