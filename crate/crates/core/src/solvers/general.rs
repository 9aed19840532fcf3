//! Items acceptable to at most two agents, via the target-set/partition generalization.
//!
//! Every agent `i` has a target threshold `x_i`; her target set `L_i` is the
//! prefix of her list down to `x_i`. Agents are split into groups. Agent `i`
//! envies `j` when she prefers `j`'s item and either both are in the same
//! group or no member of `i`'s group holds a target item. A matching is
//! satisfactory when every group has a member holding a target item.
//!
//! The recursion drops satisfied groups (their agents stay put and keep their
//! items), performs single moves into target sets, and otherwise merges a
//! source component of the group digraph while widening the merged targets.

use super::{check_preprocessed, rank_of, Algorithm, SolveError, SolveResult, SolveStats};
use crate::engine::verify_sequence;
use crate::model::{AgentId, ExchangeStep, Instance, ItemId, Matching, ReformSequence};

const SOLVER: Algorithm = Algorithm::TwoAcceptor;

#[derive(Clone, Debug)]
pub struct GeneralizedInstance {
    pub base: Instance,
    pub initial: Matching,
    /// Per agent, the least preferred item of her target set.
    pub targets: Vec<ItemId>,
    pub partition: Vec<Vec<AgentId>>,
}

impl GeneralizedInstance {
    pub fn new(
        base: Instance,
        initial: Matching,
        targets: Vec<ItemId>,
        partition: Vec<Vec<AgentId>>,
    ) -> Result<Self, SolveError> {
        let fail = |reason: String| Err(SolveError::Precondition { solver: SOLVER, reason });
        let n = base.num_agents();
        if initial.len() != n || targets.len() != n {
            return fail("initial matching and targets must cover every agent".into());
        }
        if let Some(i) = (0..n).find(|&i| !base.accepts(i, targets[i])) {
            return fail(format!("target of agent {} is not acceptable", base.agent_name(i)));
        }
        let mut seen = vec![false; n];
        for &i in partition.iter().flatten() {
            if i >= n || seen[i] {
                return fail("groups must partition the agents".into());
            }
            seen[i] = true;
        }
        if seen.contains(&false) || partition.iter().any(Vec::is_empty) {
            return fail("groups must partition the agents into nonempty parts".into());
        }
        Ok(GeneralizedInstance { base, initial, targets, partition })
    }

    /// Singleton groups with target sets `{σ(i)}`.
    pub fn reformist(base: Instance, initial: Matching, sigma: &Matching) -> Result<Self, SolveError> {
        let n = base.num_agents();
        Self::new(base, initial, sigma.as_slice().to_vec(), (0..n).map(|i| vec![i]).collect())
    }

    pub fn in_target(&self, i: AgentId, x: ItemId) -> bool {
        rank_of(&self.base, i, x) <= rank_of(&self.base, i, self.targets[i])
    }

    fn group_of(&self) -> Vec<usize> {
        let mut g = vec![0; self.base.num_agents()];
        for (a, members) in self.partition.iter().enumerate() {
            for &i in members {
                g[i] = a;
            }
        }
        g
    }

    fn satisfied_groups(&self, held: &[ItemId]) -> Vec<bool> {
        self.partition.iter().map(|m| m.iter().any(|&i| self.in_target(i, held[i]))).collect()
    }

    /// All generalized envy pairs `(envier, envied)` on `held`.
    pub fn envy_pairs(&self, held: &[ItemId]) -> Vec<(AgentId, AgentId)> {
        let group = self.group_of();
        let sat = self.satisfied_groups(held);
        let mut owner = vec![None; self.base.num_items()];
        for (j, &x) in held.iter().enumerate() {
            owner[x] = Some(j);
        }
        let mut out = Vec::new();
        for (i, &x) in held.iter().enumerate() {
            for &y in &self.base.prefs(i)[..rank_of(&self.base, i, x)] {
                if let Some(j) = owner[y] {
                    if group[i] == group[j] || !sat[group[i]] {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }

    pub fn is_satisfactory(&self, held: &[ItemId]) -> bool {
        self.satisfied_groups(held).into_iter().all(|s| s)
    }

    /// Replays `seq`, checking every matching for generalized envy and the last one
    /// for satisfaction.
    pub fn verify(&self, seq: &ReformSequence) -> Result<(), String> {
        let mut held = seq.initial.as_slice().to_vec();
        if let Some((i, j)) = self.envy_pairs(&held).first() {
            return Err(format!("initial matching has envy ({i},{j})"));
        }
        for (k, s) in seq.steps.iter().enumerate() {
            let i = s.agent;
            if i >= held.len() || held[i] != s.from_item {
                return Err(format!("step {k}: agent does not hold the source item"));
            }
            if !self.base.accepts(i, s.to_item) || !self.base.prefers(i, s.to_item, s.from_item) {
                return Err(format!("step {k}: not an improvement"));
            }
            if held.contains(&s.to_item) {
                return Err(format!("step {k}: target item is assigned"));
            }
            held[i] = s.to_item;
            if let Some((a, b)) = self.envy_pairs(&held).first() {
                return Err(format!("step {k}: creates envy ({a},{b})"));
            }
        }
        if !self.is_satisfactory(&held) {
            return Err("final matching is not satisfactory".into());
        }
        Ok(())
    }
}

/// Working state of the recursion. Groups are never renumbered: dropping a
/// group clears its active flag, merging appends a new group.
#[derive(Clone)]
struct State<'a> {
    inst: &'a Instance,
    held: Vec<ItemId>,
    owner: Vec<Option<AgentId>>,
    threshold: Vec<usize>,
    group_of: Vec<usize>,
    groups: Vec<Vec<AgentId>>,
    active: Vec<bool>,
}

impl State<'_> {
    fn in_target(&self, i: AgentId) -> bool {
        rank_of(self.inst, i, self.held[i]) <= self.threshold[i]
    }

    fn satisfied(&self, g: usize) -> bool {
        self.groups[g].iter().any(|&i| self.in_target(i))
    }

    fn target_set(&self, i: AgentId) -> &[ItemId] {
        &self.inst.prefs(i)[..=self.threshold[i]]
    }

    fn legal(&self, i: AgentId, y: ItemId) -> bool {
        self.owner[y].is_none()
            && self.inst.prefers(i, y, self.held[i])
            && self.inst.acceptors(y).iter().all(|&k| {
                k == i
                    || !self.inst.prefers(k, y, self.held[k])
                    || (self.group_of[k] != self.group_of[i] && self.satisfied(self.group_of[k]))
            })
    }

    fn apply(&mut self, i: AgentId, y: ItemId) -> ExchangeStep {
        let from = self.held[i];
        self.owner[from] = None;
        self.owner[y] = Some(i);
        self.held[i] = y;
        ExchangeStep::new(i, from, y)
    }

    fn apply_checked(&mut self, step: &ExchangeStep) -> Result<(), SolveError> {
        if self.held[step.agent] != step.from_item || !self.legal(step.agent, step.to_item) {
            return Err(internal(format!(
                "reconstructed step ({}: {} -> {}) is not legal",
                step.agent, step.from_item, step.to_item
            )));
        }
        self.apply(step.agent, step.to_item);
        Ok(())
    }

    fn active_groups(&self) -> Vec<usize> {
        (0..self.groups.len()).filter(|&g| self.active[g]).collect()
    }

    fn measure(&self) -> usize {
        self.active_groups()
            .into_iter()
            .flat_map(|g| self.groups[g].iter())
            .map(|&i| self.inst.prefs(i).len() - self.threshold[i])
            .sum()
    }
}

fn internal(detail: String) -> SolveError {
    SolveError::Internal { solver: SOLVER, detail }
}

struct Ctx {
    nodes: u64,
    max_depth: usize,
    trace: Vec<usize>,
}

fn solve_rec(
    mut st: State<'_>,
    parent_measure: Option<usize>,
    depth: usize,
    ctx: &mut Ctx,
) -> Result<Vec<ExchangeStep>, SolveError> {
    let measure = st.measure();
    ctx.nodes += 1;
    ctx.max_depth = ctx.max_depth.max(depth);
    ctx.trace.push(measure);
    if let Some(pm) = parent_measure {
        if measure >= pm {
            return Err(internal(format!("recursion measure did not decrease ({pm} -> {measure})")));
        }
    }
    let groups = st.active_groups();
    let slack: usize =
        groups.iter().flat_map(|&g| st.groups[g].iter()).map(|&i| st.inst.prefs(i).len() - st.threshold[i] - 1).sum();
    if groups.is_empty() || slack == 0 {
        return Ok(Vec::new());
    }

    // Some group already holds a target item.
    if let Some(&g) = groups.iter().find(|&&g| st.satisfied(g)) {
        st.active[g] = false;
        return solve_rec(st, Some(measure), depth + 1, ctx);
    }

    // Some agent can move into her target set directly.
    let mut agents: Vec<AgentId> = groups.iter().flat_map(|&g| st.groups[g].iter().copied()).collect();
    agents.sort_unstable();
    for &i in &agents {
        if let Some(&y) = st.target_set(i).iter().find(|&&y| st.legal(i, y)) {
            let step = st.apply(i, y);
            let g = st.group_of[i];
            st.active[g] = false;
            let mut rest = solve_rec(st, Some(measure), depth + 1, ctx)?;
            rest.insert(0, step);
            return Ok(rest);
        }
    }

    // Merge a source component of the group digraph.
    let k = groups.len();
    let adj: Vec<Vec<usize>> = (0..k)
        .map(|a| {
            (0..k)
                .filter(|&b| {
                    a != b
                        && st.groups[groups[a]].iter().any(|&i| {
                            st.groups[groups[b]]
                                .iter()
                                .any(|&j| st.target_set(j).iter().any(|&x| st.inst.accepts(i, x)))
                        })
                })
                .collect()
        })
        .collect();
    let comp = strongly_connected_components(&adj);
    let ncomp = comp.iter().max().map_or(0, |&c| c + 1);
    let mut has_incoming = vec![false; ncomp];
    for (a, outs) in adj.iter().enumerate() {
        for &b in outs {
            if comp[a] != comp[b] {
                has_incoming[comp[b]] = true;
            }
        }
    }
    let min_agent = |c: usize| {
        (0..k).filter(|&a| comp[a] == c).flat_map(|a| st.groups[groups[a]].iter().copied()).min().unwrap_or(usize::MAX)
    };
    let source = (0..ncomp)
        .filter(|&c| !has_incoming[c])
        .min_by_key(|&c| min_agent(c))
        .ok_or_else(|| internal("group digraph has no source component".into()))?;
    let s_groups: Vec<usize> = (0..k).filter(|&a| comp[a] == source).map(|a| groups[a]).collect();
    let mut merged: Vec<AgentId> = s_groups.iter().flat_map(|&g| st.groups[g].iter().copied()).collect();
    merged.sort_unstable();

    let mut in_x = vec![false; st.inst.num_items()];
    for &i in &merged {
        for &x in st.target_set(i) {
            in_x[x] = true;
        }
    }
    let mut next = st.clone();
    let new_group = next.groups.len();
    for &g in &s_groups {
        next.active[g] = false;
    }
    next.groups.push(merged.clone());
    next.active.push(true);
    for &i in &merged {
        next.group_of[i] = new_group;
        let prefs = st.inst.prefs(i);
        next.threshold[i] = (0..prefs.len()).rev().find(|&r| in_x[prefs[r]]).expect("own target set lies in X");
    }
    let widened = next.threshold.clone();
    let sub = solve_rec(next, Some(measure), depth + 1, ctx)?;
    expand(st, &sub, &s_groups, &merged, &widened)
}

/// Turns a solution of the merged instance into one of the unmerged instance
/// that is exactly `|S|` steps longer.
fn expand(
    mut st: State<'_>,
    sub: &[ExchangeStep],
    s_groups: &[usize],
    merged: &[AgentId],
    widened: &[usize],
) -> Result<Vec<ExchangeStep>, SolveError> {
    let inst = st.inst;
    let in_widened = |i: AgentId, x: ItemId| rank_of(inst, i, x) <= widened[i];
    let mut is_merged = vec![false; inst.num_agents()];
    for &i in merged {
        is_merged[i] = true;
    }

    // First prefix after which some merged agent holds a widened target item.
    let mut held = st.held.clone();
    let mut first = None;
    for p in 0..=sub.len() {
        if let Some(&i0) = merged.iter().find(|&&i| in_widened(i, held[i])) {
            first = Some((p, i0));
            break;
        }
        if let Some(s) = sub.get(p) {
            held[s.agent] = s.to_item;
        }
    }
    let (p, i0) = first.ok_or_else(|| internal("merged group never reaches its widened targets".into()))?;

    let mut out = Vec::with_capacity(sub.len() + s_groups.len());
    for s in &sub[..p] {
        st.apply_checked(s)?;
        out.push(*s);
    }

    let x1 = inst.prefs(i0)[widened[i0]];
    let i1 = inst
        .acceptors(x1)
        .iter()
        .copied()
        .find(|&j| j != i0 && is_merged[j] && rank_of(inst, j, x1) <= st.threshold[j])
        .ok_or_else(|| internal("widened threshold item has no owner in the component".into()))?;
    let step = ExchangeStep::new(i1, st.held[i1], x1);
    st.apply_checked(&step)?;
    out.push(step);

    let mut inserted = 1;
    while let Some(&g) = s_groups.iter().find(|&&g| !st.satisfied(g)) {
        let mut chosen = None;
        'search: for &b in s_groups.iter().filter(|&&b| !st.satisfied(b)) {
            for &i2 in &st.groups[b] {
                for &x2 in st.target_set(i2) {
                    let fed = inst
                        .acceptors(x2)
                        .iter()
                        .any(|&k| k != i2 && s_groups.contains(&st.group_of[k]) && st.satisfied(st.group_of[k]));
                    if fed && st.legal(i2, x2) {
                        chosen = Some((i2, x2));
                        break 'search;
                    }
                }
            }
        }
        let (i2, x2) = chosen.ok_or_else(|| internal(format!("no arc into unsatisfied group {g}")))?;
        out.push(st.apply(i2, x2));
        inserted += 1;
    }
    if inserted != s_groups.len() {
        return Err(internal(format!("inserted {inserted} steps for a component of {} groups", s_groups.len())));
    }

    for s in sub[p..].iter().filter(|s| !is_merged[s.agent]) {
        st.apply_checked(s)?;
        out.push(*s);
    }
    Ok(out)
}

/// Component index per vertex (Kosaraju).
pub(crate) fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut radj = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}

/// Shortest sequence of generalized-envy-free matchings to a satisfactory one.
/// Requires every item to be acceptable to at most two agents.
pub fn solve_general_ln(g: &GeneralizedInstance) -> Result<SolveResult, SolveError> {
    let inst = &g.base;
    if let Some(x) = (0..inst.num_items()).find(|&x| inst.acceptors(x).len() > 2) {
        return Err(SolveError::Precondition {
            solver: SOLVER,
            reason: format!("item {} has {} acceptors", inst.item_name(x), inst.acceptors(x).len()),
        });
    }
    if let Some(&(i, j)) = g.envy_pairs(g.initial.as_slice()).first() {
        return Err(SolveError::Precondition {
            solver: SOLVER,
            reason: format!("initial matching has generalized envy ({i},{j})"),
        });
    }
    let held = g.initial.as_slice().to_vec();
    let mut owner = vec![None; inst.num_items()];
    for (i, &x) in held.iter().enumerate() {
        owner[x] = Some(i);
    }
    let st = State {
        inst,
        held,
        owner,
        threshold: (0..inst.num_agents()).map(|i| rank_of(inst, i, g.targets[i])).collect(),
        group_of: g.group_of(),
        groups: g.partition.clone(),
        active: vec![true; g.partition.len()],
    };
    let mut ctx = Ctx { nodes: 0, max_depth: 0, trace: Vec::new() };
    let steps = solve_rec(st, None, 0, &mut ctx)?;
    let seq = ReformSequence { initial: g.initial.clone(), steps };
    g.verify(&seq).map_err(internal)?;
    Ok(SolveResult {
        sequence: Some(seq),
        stats: SolveStats {
            nodes: ctx.nodes,
            max_depth: ctx.max_depth,
            measure_trace: ctx.trace,
            solver: Some(SOLVER),
        },
    })
}

/// Shortest reformist sequence when every item has at most two acceptors.
pub fn shortest_two_acceptor(inst: &Instance, mu: &Matching) -> Result<SolveResult, SolveError> {
    let sigma = check_preprocessed(inst, mu, SOLVER)?;
    let g = GeneralizedInstance::reformist(inst.clone(), mu.clone(), &sigma)?;
    let res = solve_general_ln(&g)?;
    let seq = res.sequence.as_ref().expect("feasible");
    if !verify_sequence(inst, seq).is_reformist() {
        return Err(internal("witness is not a reformist sequence".into()));
    }
    Ok(res)
}
