//! Instances, matchings, envy and the single-agent exchange relation.
//!
//! Agents and items are dense `usize` indices. Every agent has a strict,
//! possibly incomplete preference list (most preferred first). A matching
//! assigns every agent one acceptable item, injectively.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub type AgentId = usize;
pub type ItemId = usize;

const UNRANKED: u32 = u32::MAX;

/// An instance before validation, keyed by names. This is what files load into.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub items: Vec<String>,
    pub agents: Vec<RawAgent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAgent {
    pub name: String,
    pub prefs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateItemName(String),
    DuplicateAgentName(String),
    /// The same item appears twice in one agent's list.
    DuplicateInList {
        agent: String,
        item: String,
    },
    /// An agent lists an item that is not declared.
    UnknownItem {
        agent: String,
        item: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateItemName(x) => write!(f, "duplicate item name {x:?}"),
            Violation::DuplicateAgentName(a) => write!(f, "duplicate agent name {a:?}"),
            Violation::DuplicateInList { agent, item } => {
                write!(f, "duplicate item {item:?} in preference list of agent {agent:?}")
            }
            Violation::UnknownItem { agent, item } => {
                write!(f, "unknown item {item:?} in preference list of agent {agent:?}")
            }
        }
    }
}

/// Lists every invariant violation of a raw instance. Empty means valid.
pub fn validate_instance(raw: &RawInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut items = HashMap::new();
    for (x, name) in raw.items.iter().enumerate() {
        if items.insert(name.as_str(), x).is_some() {
            out.push(Violation::DuplicateItemName(name.clone()));
        }
    }
    let mut agents = HashMap::new();
    for agent in &raw.agents {
        if agents.insert(agent.name.as_str(), ()).is_some() {
            out.push(Violation::DuplicateAgentName(agent.name.clone()));
        }
        let mut seen = HashMap::new();
        for item in &agent.prefs {
            if !items.contains_key(item.as_str()) {
                out.push(Violation::UnknownItem { agent: agent.name.clone(), item: item.clone() });
            } else if seen.insert(item.as_str(), ()).is_some() {
                out.push(Violation::DuplicateInList { agent: agent.name.clone(), item: item.clone() });
            }
        }
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidInstance(pub Vec<Violation>);

impl RawInstance {
    pub fn build(&self) -> Result<Instance, InvalidInstance> {
        let violations = validate_instance(self);
        if !violations.is_empty() {
            return Err(InvalidInstance(violations));
        }
        let index: HashMap<&str, ItemId> = self.items.iter().enumerate().map(|(x, n)| (n.as_str(), x)).collect();
        let mut b = InstanceBuilder::new();
        for name in &self.items {
            b.item(name);
        }
        for agent in &self.agents {
            let prefs = agent.prefs.iter().map(|n| index[n.as_str()]).collect();
            b.agent(&agent.name, prefs);
        }
        b.build()
    }
}

/// Incremental construction of an [`Instance`] with named agents and items.
#[derive(Clone, Debug, Default)]
pub struct InstanceBuilder {
    items: Vec<String>,
    item_index: HashMap<String, ItemId>,
    agents: Vec<String>,
    prefs: Vec<Vec<ItemId>>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of the item with this name, declaring it if new.
    pub fn item(&mut self, name: &str) -> ItemId {
        if let Some(&x) = self.item_index.get(name) {
            return x;
        }
        let x = self.items.len();
        self.items.push(name.to_string());
        self.item_index.insert(name.to_string(), x);
        x
    }

    pub fn agent(&mut self, name: &str, prefs: Vec<ItemId>) -> AgentId {
        self.agents.push(name.to_string());
        self.prefs.push(prefs);
        self.agents.len() - 1
    }

    /// Declares an agent whose list is given by item names (declaring items as needed).
    pub fn agent_named(&mut self, name: &str, prefs: &[&str]) -> AgentId {
        let prefs = prefs.iter().map(|p| self.item(p)).collect();
        self.agent(name, prefs)
    }

    pub fn build(self) -> Result<Instance, InvalidInstance> {
        Instance::from_parts(self.items, self.agents, self.prefs)
    }
}

/// An immutable house-allocation instance with precomputed rank tables.
#[derive(Clone, Debug)]
pub struct Instance {
    item_names: Vec<String>,
    agent_names: Vec<String>,
    prefs: Vec<Vec<ItemId>>,
    // rank[i * m + x] = position of x in agent i's list, or UNRANKED.
    rank: Vec<u32>,
    acceptors: Vec<Vec<AgentId>>,
    item_index: HashMap<String, ItemId>,
    agent_index: HashMap<String, AgentId>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.item_names == other.item_names && self.agent_names == other.agent_names && self.prefs == other.prefs
    }
}

impl Eq for Instance {}

impl Instance {
    pub fn from_parts(
        item_names: Vec<String>,
        agent_names: Vec<String>,
        prefs: Vec<Vec<ItemId>>,
    ) -> Result<Self, InvalidInstance> {
        assert_eq!(agent_names.len(), prefs.len());
        let m = item_names.len();
        let mut violations = Vec::new();
        let mut item_index = HashMap::new();
        for (x, name) in item_names.iter().enumerate() {
            if item_index.insert(name.clone(), x).is_some() {
                violations.push(Violation::DuplicateItemName(name.clone()));
            }
        }
        let mut agent_index = HashMap::new();
        for (i, name) in agent_names.iter().enumerate() {
            if agent_index.insert(name.clone(), i).is_some() {
                violations.push(Violation::DuplicateAgentName(name.clone()));
            }
        }
        let mut rank = vec![UNRANKED; agent_names.len() * m];
        let mut acceptors = vec![Vec::new(); m];
        for (i, list) in prefs.iter().enumerate() {
            for (pos, &x) in list.iter().enumerate() {
                if x >= m {
                    violations.push(Violation::UnknownItem { agent: agent_names[i].clone(), item: format!("#{x}") });
                } else if rank[i * m + x] != UNRANKED {
                    violations.push(Violation::DuplicateInList {
                        agent: agent_names[i].clone(),
                        item: item_names[x].clone(),
                    });
                } else {
                    rank[i * m + x] = pos as u32;
                    acceptors[x].push(i);
                }
            }
        }
        if !violations.is_empty() {
            return Err(InvalidInstance(violations));
        }
        Ok(Instance { item_names, agent_names, prefs, rank, acceptors, item_index, agent_index })
    }

    pub fn num_agents(&self) -> usize {
        self.agent_names.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_names.len()
    }

    /// Agent `i`'s acceptable items, most preferred first.
    pub fn prefs(&self, i: AgentId) -> &[ItemId] {
        &self.prefs[i]
    }

    /// Position of `x` in agent `i`'s list (0 = most preferred).
    #[inline]
    pub fn rank(&self, i: AgentId, x: ItemId) -> Option<usize> {
        match self.rank[i * self.item_names.len() + x] {
            UNRANKED => None,
            r => Some(r as usize),
        }
    }

    #[inline]
    pub fn accepts(&self, i: AgentId, x: ItemId) -> bool {
        self.rank[i * self.item_names.len() + x] != UNRANKED
    }

    /// `x ≻_i y`: both acceptable to `i` and `x` strictly preferred.
    #[inline]
    pub fn prefers(&self, i: AgentId, x: ItemId, y: ItemId) -> bool {
        let m = self.item_names.len();
        let rx = self.rank[i * m + x];
        let ry = self.rank[i * m + y];
        rx != UNRANKED && ry != UNRANKED && rx < ry
    }

    /// Agents that list `x`, ascending.
    pub fn acceptors(&self, x: ItemId) -> &[AgentId] {
        &self.acceptors[x]
    }

    pub fn item_name(&self, x: ItemId) -> &str {
        &self.item_names[x]
    }

    pub fn agent_name(&self, i: AgentId) -> &str {
        &self.agent_names[i]
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agent_names
    }

    pub fn item_id(&self, name: &str) -> Option<ItemId> {
        self.item_index.get(name).copied()
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agent_index.get(name).copied()
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            items: self.item_names.clone(),
            agents: (0..self.num_agents())
                .map(|i| RawAgent {
                    name: self.agent_names[i].clone(),
                    prefs: self.prefs[i].iter().map(|&x| self.item_names[x].clone()).collect(),
                })
                .collect(),
        }
    }

    /// Same agents and items, with each list filtered by `keep(agent, item)`.
    pub fn retain(&self, mut keep: impl FnMut(AgentId, ItemId) -> bool) -> Instance {
        let prefs = self
            .prefs
            .iter()
            .enumerate()
            .map(|(i, list)| list.iter().copied().filter(|&x| keep(i, x)).collect())
            .collect();
        Instance::from_parts(self.item_names.clone(), self.agent_names.clone(), prefs)
            .expect("filtering a valid instance keeps it valid")
    }

    /// Largest number of agents accepting a single item.
    pub fn max_acceptors(&self) -> usize {
        self.acceptors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Longest preference list.
    pub fn max_list_len(&self) -> usize {
        self.prefs.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("matching has {found} entries but the instance has {expected} agents")]
    WrongLength { expected: usize, found: usize },
    #[error("agent {agent} is assigned item {item} which it does not accept")]
    NotAcceptable { agent: AgentId, item: ItemId },
    #[error("item {item} is assigned to both agent {first} and agent {second}")]
    NotInjective { item: ItemId, first: AgentId, second: AgentId },
    #[error("matching is not envy-free: agent {envier} envies agent {envied}")]
    NotEnvyFree { envier: AgentId, envied: AgentId },
}

/// An injective, acceptable agent → item assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching(Vec<ItemId>);

impl Matching {
    pub fn new(inst: &Instance, items: Vec<ItemId>) -> Result<Self, ModelError> {
        check_assignment(inst, &items)?;
        Ok(Matching(items))
    }

    /// Builds a matching from `(agent name, item name)` pairs.
    pub fn from_names(inst: &Instance, pairs: &[(&str, &str)]) -> Option<Result<Self, ModelError>> {
        let mut items = vec![usize::MAX; inst.num_agents()];
        for &(a, x) in pairs {
            items[inst.agent_id(a)?] = inst.item_id(x)?;
        }
        if items.contains(&usize::MAX) {
            return None;
        }
        Some(Matching::new(inst, items))
    }

    pub(crate) fn from_vec_unchecked(items: Vec<ItemId>) -> Self {
        Matching(items)
    }

    #[inline]
    pub fn item(&self, i: AgentId) -> ItemId {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[ItemId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<ItemId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `owner[x]` is the agent holding `x`, if any.
    pub fn owners(&self, num_items: usize) -> Vec<Option<AgentId>> {
        let mut owner = vec![None; num_items];
        for (i, &x) in self.0.iter().enumerate() {
            owner[x] = Some(i);
        }
        owner
    }

    /// Renders as `(name→item, ...)` for messages.
    pub fn display<'a>(&'a self, inst: &'a Instance) -> impl fmt::Display + 'a {
        DisplayMatching(self, inst)
    }
}

struct DisplayMatching<'a>(&'a Matching, &'a Instance);

impl fmt::Display for DisplayMatching<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, &x) in self.0.as_slice().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}→{}", self.1.agent_name(i), self.1.item_name(x))?;
        }
        write!(f, ")")
    }
}

fn check_assignment(inst: &Instance, items: &[ItemId]) -> Result<(), ModelError> {
    if items.len() != inst.num_agents() {
        return Err(ModelError::WrongLength { expected: inst.num_agents(), found: items.len() });
    }
    let mut owner: Vec<Option<AgentId>> = vec![None; inst.num_items()];
    for (i, &x) in items.iter().enumerate() {
        if x >= inst.num_items() || !inst.accepts(i, x) {
            return Err(ModelError::NotAcceptable { agent: i, item: x });
        }
        if let Some(first) = owner[x] {
            return Err(ModelError::NotInjective { item: x, first, second: i });
        }
        owner[x] = Some(i);
    }
    Ok(())
}

/// One application of the improvement relation: `agent` trades `from_item` for `to_item`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExchangeStep {
    pub agent: AgentId,
    pub from_item: ItemId,
    pub to_item: ItemId,
}

impl ExchangeStep {
    pub fn new(agent: AgentId, from_item: ItemId, to_item: ItemId) -> Self {
        ExchangeStep { agent, from_item, to_item }
    }
}

/// Why a proposed exchange is not an improvement step.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExchangeError {
    #[error("agent {0} does not exist")]
    UnknownAgent(AgentId),
    #[error("agent {agent} holds item {holds}, not {claimed}")]
    WrongFromItem { agent: AgentId, holds: ItemId, claimed: ItemId },
    #[error("agent {agent} does not accept item {item}")]
    NotAcceptable { agent: AgentId, item: ItemId },
    #[error("item {item} is not unassigned (held by agent {owner})")]
    NotUnassigned { item: ItemId, owner: AgentId },
    #[error("agent {agent} does not prefer item {to} to item {from}")]
    NotImproving { agent: AgentId, from: ItemId, to: ItemId },
    #[error("creates envy ({envier},{envied})")]
    CreatesEnvy { envier: AgentId, envied: AgentId },
}

/// A chain of improvement steps starting at `initial`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReformSequence {
    pub initial: Matching,
    pub steps: Vec<ExchangeStep>,
}

impl ReformSequence {
    pub fn new(initial: Matching) -> Self {
        ReformSequence { initial, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Matching after replaying all steps, without checking legality.
    pub fn final_matching(&self) -> Matching {
        let mut items = self.initial.0.clone();
        for s in &self.steps {
            items[s.agent] = s.to_item;
        }
        Matching(items)
    }
}

/// Mutable assignment with an owner table, for fast repeated exchange checks.
#[derive(Clone, Debug)]
pub struct Board<'a> {
    inst: &'a Instance,
    held: Vec<ItemId>,
    owner: Vec<Option<AgentId>>,
}

impl<'a> Board<'a> {
    pub fn new(inst: &'a Instance, mu: &Matching) -> Self {
        Board { inst, held: mu.0.clone(), owner: mu.owners(inst.num_items()) }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    #[inline]
    pub fn held(&self, i: AgentId) -> ItemId {
        self.held[i]
    }

    pub fn held_items(&self) -> &[ItemId] {
        &self.held
    }

    #[inline]
    pub fn owner(&self, x: ItemId) -> Option<AgentId> {
        self.owner[x]
    }

    pub fn matching(&self) -> Matching {
        Matching(self.held.clone())
    }

    /// First agent other than `mover` that would envy whoever holds `y`.
    #[inline]
    pub fn blocker(&self, mover: AgentId, y: ItemId) -> Option<AgentId> {
        self.inst.acceptors(y).iter().copied().find(|&k| k != mover && self.inst.prefers(k, y, self.held[k]))
    }

    /// Checks the three conditions of an improvement step.
    pub fn check(&self, step: &ExchangeStep) -> Result<(), ExchangeError> {
        let i = step.agent;
        if i >= self.held.len() {
            return Err(ExchangeError::UnknownAgent(i));
        }
        if self.held[i] != step.from_item {
            return Err(ExchangeError::WrongFromItem { agent: i, holds: self.held[i], claimed: step.from_item });
        }
        let y = step.to_item;
        if y >= self.inst.num_items() || !self.inst.accepts(i, y) {
            return Err(ExchangeError::NotAcceptable { agent: i, item: y });
        }
        if let Some(owner) = self.owner[y] {
            return Err(ExchangeError::NotUnassigned { item: y, owner });
        }
        if !self.inst.prefers(i, y, step.from_item) {
            return Err(ExchangeError::NotImproving { agent: i, from: step.from_item, to: y });
        }
        if let Some(k) = self.blocker(i, y) {
            return Err(ExchangeError::CreatesEnvy { envier: k, envied: i });
        }
        Ok(())
    }

    #[inline]
    pub fn can_move(&self, i: AgentId, y: ItemId) -> bool {
        self.owner[y].is_none() && self.inst.prefers(i, y, self.held[i]) && self.blocker(i, y).is_none()
    }

    /// Items agent `i` can legally move to, most preferred first.
    pub fn moves(&self, i: AgentId) -> impl Iterator<Item = ItemId> + '_ {
        let cur = self.inst.rank(i, self.held[i]).expect("held item is acceptable");
        self.inst.prefs(i)[..cur].iter().copied().filter(move |&y| self.can_move(i, y))
    }

    /// Agent `i`'s most preferred legal move.
    pub fn best_move(&self, i: AgentId) -> Option<ItemId> {
        self.moves(i).next()
    }

    /// Moves `i` to `y` without checking legality. Returns the step taken.
    pub fn apply(&mut self, i: AgentId, y: ItemId) -> ExchangeStep {
        let from = self.held[i];
        debug_assert!(self.owner[y].is_none());
        self.owner[from] = None;
        self.owner[y] = Some(i);
        self.held[i] = y;
        ExchangeStep::new(i, from, y)
    }

    pub fn try_apply(&mut self, step: &ExchangeStep) -> Result<(), ExchangeError> {
        self.check(step)?;
        self.apply(step.agent, step.to_item);
        Ok(())
    }

    pub fn envy_pairs(&self) -> Vec<(AgentId, AgentId)> {
        let mut out = Vec::new();
        for i in 0..self.held.len() {
            let cur = self.inst.rank(i, self.held[i]).expect("held item is acceptable");
            for &x in &self.inst.prefs(i)[..cur] {
                if let Some(j) = self.owner[x] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// All pairs `(i, j)` such that `i` strictly prefers `j`'s item to its own.
pub fn envy_pairs(inst: &Instance, mu: &Matching) -> Result<Vec<(AgentId, AgentId)>, ModelError> {
    check_assignment(inst, &mu.0)?;
    Ok(Board::new(inst, mu).envy_pairs())
}

pub fn is_envy_free(inst: &Instance, mu: &Matching) -> Result<bool, ModelError> {
    Ok(envy_pairs(inst, mu)?.is_empty())
}

/// Errors unless `mu` is a valid, envy-free matching for `inst`.
pub fn require_envy_free(inst: &Instance, mu: &Matching) -> Result<(), ModelError> {
    match envy_pairs(inst, mu)?.first() {
        Some(&(envier, envied)) => Err(ModelError::NotEnvyFree { envier, envied }),
        None => Ok(()),
    }
}

/// Every improvement step available from `mu`, by ascending agent and then
/// descending preference of the target item.
pub fn feasible_exchanges(inst: &Instance, mu: &Matching) -> Result<Vec<ExchangeStep>, ModelError> {
    require_envy_free(inst, mu)?;
    let board = Board::new(inst, mu);
    let mut out = Vec::new();
    for i in 0..inst.num_agents() {
        out.extend(board.moves(i).map(|y| ExchangeStep::new(i, mu.item(i), y)));
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exchange(#[from] ExchangeError),
}

pub fn apply_exchange(inst: &Instance, mu: &Matching, step: &ExchangeStep) -> Result<Matching, ApplyError> {
    require_envy_free(inst, mu)?;
    let mut board = Board::new(inst, mu);
    board.try_apply(step)?;
    Ok(board.matching())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledArc {
    pub tail: ItemId,
    pub head: ItemId,
    pub agent: AgentId,
}

/// Item digraph: for each agent, an arc from every listed item to the one just above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemGraph {
    pub num_items: usize,
    pub arcs: Vec<LabeledArc>,
}

pub fn build_item_graph(inst: &Instance) -> ItemGraph {
    let mut arcs = Vec::new();
    for i in 0..inst.num_agents() {
        for w in inst.prefs(i).windows(2) {
            arcs.push(LabeledArc { tail: w[1], head: w[0], agent: i });
        }
    }
    ItemGraph { num_items: inst.num_items(), arcs }
}

impl ItemGraph {
    pub fn arcs_of(&self, agent: AgentId) -> impl Iterator<Item = &LabeledArc> {
        self.arcs.iter().filter(move |a| a.agent == agent)
    }

    /// Vertices reachable from `from` along arcs labeled `agent`, excluding `from`.
    pub fn reachable(&self, agent: AgentId, from: ItemId) -> Vec<ItemId> {
        let mut next = vec![None; self.num_items];
        for a in self.arcs_of(agent) {
            next[a.tail] = Some(a.head);
        }
        let mut out = Vec::new();
        let mut cur = from;
        while let Some(h) = next[cur] {
            out.push(h);
            cur = h;
        }
        out
    }
}
