//! Branching on intermediate items, the items held neither initially nor at the end.

use super::{check_preprocessed, Algorithm, SolveError, SolveResult, SolveStats};
use crate::engine::verify_sequence;
use crate::model::{AgentId, ExchangeStep, Instance, ItemId, Matching, ReformSequence};

const SOLVER: Algorithm = Algorithm::FptK;

/// Items acceptable to someone but held neither in `mu` nor in `sigma`, ascending.
pub fn intermediate_items(inst: &Instance, mu: &Matching, sigma: &Matching) -> Vec<ItemId> {
    let mut fixed = vec![false; inst.num_items()];
    for (&a, &b) in mu.as_slice().iter().zip(sigma.as_slice()) {
        fixed[a] = true;
        fixed[b] = true;
    }
    (0..inst.num_items()).filter(|&x| !fixed[x] && !inst.acceptors(x).is_empty()).collect()
}

#[derive(Clone)]
struct Node {
    held: Vec<ItemId>,
    done: Vec<bool>,
    /// Current lists of unfinished agents, most preferred first, ending at the held item.
    lists: Vec<Vec<ItemId>>,
}

struct Ctx<'a> {
    inst: &'a Instance,
    sigma: &'a [ItemId],
    is_sigma: Vec<bool>,
    k: usize,
    nodes: u64,
    max_depth: usize,
}

impl Node {
    fn assigned(&self, x: ItemId) -> bool {
        self.held.contains(&x)
    }

    /// Whether unfinished agents other than `i` would envy the holder of `y`.
    fn envied(&self, i: AgentId, y: ItemId) -> bool {
        (0..self.held.len()).any(|k| k != i && !self.done[k] && self.held[k] != y && self.lists[k].contains(&y))
    }

    fn move_to(&mut self, i: AgentId, y: ItemId) -> ExchangeStep {
        let from = self.held[i];
        self.held[i] = y;
        for list in &mut self.lists {
            list.retain(|&x| x != from);
        }
        let pos = self.lists[i].iter().position(|&x| x == y).expect("target on list");
        self.lists[i].truncate(pos + 1);
        ExchangeStep::new(i, from, y)
    }
}

fn search(mut node: Node, depth: usize, ctx: &mut Ctx<'_>) -> Result<Option<Vec<ExchangeStep>>, SolveError> {
    ctx.nodes += 1;
    ctx.max_depth = ctx.max_depth.max(depth);
    if depth > ctx.k {
        return Err(SolveError::Internal { solver: SOLVER, detail: format!("depth {depth} exceeds |K| = {}", ctx.k) });
    }
    let n = node.held.len();
    let mut steps = Vec::new();

    // Direct moves first, lowest index first, until none applies.
    while let Some(i) = (0..n).find(|&i| {
        let s = ctx.sigma[i];
        !node.done[i] && !node.assigned(s) && !node.envied(i, s)
    }) {
        steps.push(node.move_to(i, ctx.sigma[i]));
        node.done[i] = true;
    }
    if node.done.iter().all(|&d| d) {
        return Ok(Some(steps));
    }

    let candidate = (0..ctx.inst.num_items()).filter(|&x| !ctx.is_sigma[x] && !node.assigned(x)).find_map(|x| {
        let mut users = (0..n).filter(|&i| !node.done[i] && node.lists[i].contains(&x));
        match (users.next(), users.next()) {
            (Some(i), None) => Some((x, i)),
            _ => None,
        }
    });
    let Some((x, i)) = candidate else { return Ok(None) };

    let mut take = node.clone();
    let step = take.move_to(i, x);
    let with_x = search(take, depth + 1, ctx)?.map(|rest| {
        let mut s = vec![step];
        s.extend(rest);
        s
    });
    node.lists[i].retain(|&y| y != x);
    let without_x = search(node, depth + 1, ctx)?;
    let best = match (with_x, without_x) {
        (Some(a), Some(b)) if b.len() < a.len() => Some(b),
        (Some(a), _) => Some(a),
        (None, b) => b,
    };
    Ok(best.map(|rest| {
        steps.extend(rest);
        steps
    }))
}

/// Exact shortest reformist sequence by branching on whether an intermediate
/// item with a single interested agent is used. Runs in `2^|K|` branches.
pub fn fpt_by_intermediate(inst: &Instance, mu: &Matching) -> Result<SolveResult, SolveError> {
    let sigma = check_preprocessed(inst, mu, SOLVER)?;
    let k = intermediate_items(inst, mu, &sigma).len();
    let mut is_sigma = vec![false; inst.num_items()];
    for &s in sigma.as_slice() {
        is_sigma[s] = true;
    }
    let n = inst.num_agents();
    let node = Node {
        held: mu.as_slice().to_vec(),
        done: vec![false; n],
        lists: (0..n).map(|i| inst.prefs(i).to_vec()).collect(),
    };
    let mut ctx = Ctx { inst, sigma: sigma.as_slice(), is_sigma, k, nodes: 0, max_depth: 0 };
    let steps = search(node, 0, &mut ctx)?.ok_or_else(|| SolveError::Internal {
        solver: SOLVER,
        detail: "no branch reaches the reformist matching".into(),
    })?;
    let seq = ReformSequence { initial: mu.clone(), steps };
    if !verify_sequence(inst, &seq).is_reformist() {
        return Err(SolveError::Internal { solver: SOLVER, detail: "witness is not a reformist sequence".into() });
    }
    Ok(SolveResult {
        sequence: Some(seq),
        stats: SolveStats { nodes: ctx.nodes, max_depth: ctx.max_depth, solver: Some(SOLVER), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InstanceBuilder;

    #[test]
    fn example_branches_on_r() {
        let mut b = InstanceBuilder::new();
        for x in ["x", "y", "p", "q", "r"] {
            b.item(x);
        }
        b.agent_named("1", &["p", "r", "q", "x"]);
        b.agent_named("2", &["q", "p", "y"]);
        let inst = b.build().unwrap();
        let mu = Matching::from_names(&inst, &[("1", "x"), ("2", "y")]).unwrap().unwrap();
        let sigma = crate::engine::reformist_matching(&inst, &mu).unwrap();
        assert_eq!(intermediate_items(&inst, &mu, &sigma), vec![inst.item_id("r").unwrap()]);
        let res = fpt_by_intermediate(&inst, &mu).unwrap();
        assert_eq!(res.length(), Some(3));
        assert_eq!(res.stats.max_depth, 1);
    }

    #[test]
    fn no_intermediate_items_means_direct_moves() {
        let mut b = InstanceBuilder::new();
        b.agent_named("1", &["a", "b"]);
        b.agent_named("2", &["c", "b2"]);
        let inst = b.build().unwrap();
        let mu = Matching::from_names(&inst, &[("1", "b"), ("2", "b2")]).unwrap().unwrap();
        let res = fpt_by_intermediate(&inst, &mu).unwrap();
        assert_eq!(res.length(), Some(2));
        assert_eq!(res.stats.max_depth, 0);
    }
}
