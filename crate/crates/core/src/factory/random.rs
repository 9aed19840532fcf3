use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FactoryError;
use crate::model::{Instance, Matching};

const MAX_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomConfig {
    pub agents: usize,
    pub items: usize,
    /// Longest preference list; every list has between 1 and this many items.
    pub max_len: usize,
    /// Optional cap on the number of agents accepting any single item.
    pub max_acceptors: Option<usize>,
    pub seed: u64,
}

impl RandomConfig {
    pub fn new(agents: usize, items: usize, max_len: usize, seed: u64) -> Self {
        RandomConfig { agents, items, max_len, max_acceptors: None, seed }
    }

    pub fn with_max_acceptors(mut self, cap: usize) -> Self {
        self.max_acceptors = Some(cap);
        self
    }
}

/// Random instance with an envy-free initial matching.
///
/// Agents take, in random order, their least preferred free item. A draw in which
/// some agent finds nothing free is discarded. Items an agent ranks above her own
/// but sees held by others are then struck from her list, which removes all envy.
pub fn gen_random(cfg: &RandomConfig) -> Result<(Instance, Matching), FactoryError> {
    let RandomConfig { agents: n, items: m, max_len, max_acceptors, seed } = *cfg;
    if m < n {
        return Err(FactoryError::InvalidParameter(format!("need at least as many items as agents ({m} < {n})")));
    }
    if n > 0 && (max_len == 0 || max_acceptors == Some(0)) {
        return Err(FactoryError::InvalidParameter("lists must be allowed at least one item".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let item_names: Vec<String> = (1..=m).map(|x| format!("x{x}")).collect();
    let agent_names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();

    for _ in 0..MAX_ATTEMPTS {
        let mut load = vec![0usize; m];
        let mut lists: Vec<Vec<usize>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut pool: Vec<usize> = (0..m).filter(|&x| max_acceptors.is_none_or(|c| load[x] < c)).collect();
            pool.shuffle(&mut rng);
            let len = rng.gen_range(1..=max_len.min(m)).min(pool.len());
            pool.truncate(len);
            for &x in &pool {
                load[x] += 1;
            }
            lists.push(pool);
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut taken = vec![false; m];
        let mut held = vec![usize::MAX; n];
        let mut ok = true;
        for &i in &order {
            match lists[i].iter().rev().find(|&&x| !taken[x]) {
                Some(&x) => {
                    taken[x] = true;
                    held[i] = x;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        for i in 0..n {
            let pos = lists[i].iter().position(|&x| x == held[i]).expect("held item is listed");
            let (above, below) = lists[i].split_at(pos);
            let kept: Vec<usize> = above.iter().copied().filter(|&x| !taken[x]).chain(below.iter().copied()).collect();
            lists[i] = kept;
        }
        let inst =
            Instance::from_parts(item_names.clone(), agent_names.clone(), lists).expect("generated lists are valid");
        let mu = Matching::new(&inst, held).expect("generated matching is valid");
        return Ok((inst, mu));
    }
    Err(FactoryError::RetriesExhausted(MAX_ATTEMPTS))
}
