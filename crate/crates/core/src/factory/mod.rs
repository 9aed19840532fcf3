//! Instance generators: the exponential-gap family, three gadget reductions with
//! their certificate sequences, and seeded random instances.

mod clique;
mod exponential;
pub mod graph;
mod random;
mod set_cover;
mod vertex_cover;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{AgentId, Board, Instance, InstanceBuilder, Matching, ReformSequence};

pub use clique::{clique_sequence, gen_multicolored_clique};
pub use exponential::gen_exponential_gap;
pub use graph::Graph;
pub use random::{gen_random, RandomConfig};
pub use set_cover::{claim3_sequence, gen_set_cover};
pub use vertex_cover::{claim1_sequence, gen_vertex_cover};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactoryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("witness rejected: {0}")]
    BadWitness(String),
    #[error("certificate belongs to a different family")]
    WrongFamily,
    #[error("no envy-free initial matching after {0} attempts")]
    RetriesExhausted(usize),
    #[error("internal error: certificate step {step} ({agent} -> {item}) is not an improvement step")]
    IllegalStep { step: usize, agent: String, item: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    ExponentialGap,
    VertexCover,
    SetCover,
    MulticoloredClique,
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ExponentialGap => "exponential-gap",
            Family::VertexCover => "vertex-cover",
            Family::SetCover => "set-cover",
            Family::MulticoloredClique => "multicolored-clique",
            Family::Random => "random",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The combinatorial object an instance was generated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    ExponentialGap { p: usize },
    VertexCover { graph: Graph },
    SetCover { sets: Vec<Vec<u64>>, p: usize },
    MulticoloredClique { graph: Graph, parts: Vec<usize> },
    Random(RandomConfig),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionCertificate {
    pub source: Source,
    /// Number of agents in the generated instance.
    pub agents: usize,
}

impl ReductionCertificate {
    pub fn family(&self) -> Family {
        match self.source {
            Source::ExponentialGap { .. } => Family::ExponentialGap,
            Source::VertexCover { .. } => Family::VertexCover,
            Source::SetCover { .. } => Family::SetCover,
            Source::MulticoloredClique { .. } => Family::MulticoloredClique,
            Source::Random(_) => Family::Random,
        }
    }

    /// Length of the certificate sequence built from a witness of size `k`
    /// (cover size, or clique size for the clique family). `None` for families
    /// without a witness.
    pub fn predicted_length(&self, k: usize) -> Option<usize> {
        match &self.source {
            Source::VertexCover { graph } => Some(self.agents + graph.num_edges() + k),
            Source::SetCover { sets, p } => {
                let t: usize = sets.iter().map(Vec::len).sum();
                let v = universe(sets).len();
                Some((2 * p - 4) * k + 2 * t + 4 * sets.len() + v + 1)
            }
            Source::MulticoloredClique { .. } => Some(self.agents + k * k.saturating_sub(1) / 2 + k),
            Source::ExponentialGap { .. } | Source::Random(_) => None,
        }
    }
}

pub(crate) fn universe(sets: &[Vec<u64>]) -> Vec<u64> {
    let mut v: Vec<u64> = sets.iter().flatten().copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// A generated instance with its initial matching and provenance.
#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    pub initial: Matching,
    pub certificate: ReductionCertificate,
}

/// A certificate sequence with one phase label per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateSequence {
    pub sequence: ReformSequence,
    pub phases: Vec<String>,
}

impl CertificateSequence {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Builds instances where every agent `i` owns the items `r_i` and `s_i`.
pub(crate) struct Gadgets {
    builder: InstanceBuilder,
}

impl Gadgets {
    pub fn new() -> Self {
        Gadgets { builder: InstanceBuilder::new() }
    }

    pub fn r(agent: &str) -> String {
        format!("r_{agent}")
    }

    pub fn s(agent: &str) -> String {
        format!("s_{agent}")
    }

    /// Adds an agent whose list is `r_agent`, `middle...`, `s_agent`, dropping
    /// repeated entries after their first occurrence.
    pub fn agent(&mut self, name: &str, top: Option<&str>, middle: &[String]) {
        let mut names: Vec<String> = Vec::with_capacity(middle.len() + 2);
        names.push(top.map_or_else(|| Self::r(name), str::to_string));
        names.extend(middle.iter().cloned());
        names.push(Self::s(name));
        let mut ids = Vec::with_capacity(names.len());
        for n in &names {
            let id = self.builder.item(n);
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        self.builder.agent(name, ids);
    }

    pub fn items(&mut self, names: &[String]) {
        for n in names {
            self.builder.item(n);
        }
    }

    /// Adds an agent with an explicit list.
    pub fn plain_agent(&mut self, name: &str, list: &[String]) {
        let ids = list.iter().map(|n| self.builder.item(n)).collect();
        self.builder.agent(name, ids);
    }

    /// The instance and the matching giving each agent the last item on her list.
    pub fn finish(self) -> (Instance, Matching) {
        let inst = self.builder.build().expect("gadget lists are duplicate free");
        let held = (0..inst.num_agents()).map(|i| *inst.prefs(i).last().expect("nonempty list")).collect();
        let mu = Matching::new(&inst, held).expect("bottom items are distinct");
        (inst, mu)
    }
}

/// Replays named moves and checks each one as it is recorded.
pub(crate) struct Recorder<'a> {
    inst: &'a Instance,
    board: Board<'a>,
    initial: Matching,
    steps: Vec<crate::model::ExchangeStep>,
    phases: Vec<String>,
    agent_ids: HashMap<&'a str, AgentId>,
}

impl<'a> Recorder<'a> {
    pub fn new(inst: &'a Instance, mu: &Matching) -> Self {
        let agent_ids = inst.agent_names().iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        Recorder {
            inst,
            board: Board::new(inst, mu),
            initial: mu.clone(),
            steps: Vec::new(),
            phases: Vec::new(),
            agent_ids,
        }
    }

    pub fn mv(&mut self, phase: &str, agent: &str, item: &str) -> Result<(), FactoryError> {
        let illegal = || FactoryError::IllegalStep { step: self.steps.len(), agent: agent.into(), item: item.into() };
        let i = *self.agent_ids.get(agent).ok_or_else(illegal)?;
        let y = self.inst.item_id(item).ok_or_else(illegal)?;
        let step = crate::model::ExchangeStep::new(i, self.board.held(i), y);
        self.board.try_apply(&step).map_err(|_| illegal())?;
        self.steps.push(step);
        self.phases.push(phase.to_string());
        Ok(())
    }

    pub fn finish(self) -> CertificateSequence {
        CertificateSequence {
            sequence: ReformSequence { initial: self.initial, steps: self.steps },
            phases: self.phases,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gadget_lists_drop_repeats() {
        let mut g = Gadgets::new();
        g.agent("a", None, &[Gadgets::r("a"), "t".into()]);
        let (inst, mu) = g.finish();
        let names: Vec<&str> = inst.prefs(0).iter().map(|&x| inst.item_name(x)).collect();
        assert_eq!(names, ["r_a", "t", "s_a"]);
        assert_eq!(inst.item_name(mu.item(0)), "s_a");
    }

    #[test]
    fn predicted_lengths() {
        let vc = ReductionCertificate { source: Source::VertexCover { graph: Graph::complete(4) }, agents: 56 };
        assert_eq!(vc.predicted_length(3), Some(65));
        let sc =
            ReductionCertificate { source: Source::SetCover { sets: vec![vec![1, 2], vec![2, 3]], p: 3 }, agents: 0 };
        assert_eq!(sc.predicted_length(1), Some(22));
        assert_eq!(sc.predicted_length(2), Some(24));
        let mc = ReductionCertificate {
            source: Source::MulticoloredClique { graph: Graph::complete(3), parts: vec![0, 1, 2] },
            agents: 13,
        };
        assert_eq!(mc.predicted_length(3), Some(19));
        let ex = ReductionCertificate { source: Source::ExponentialGap { p: 4 }, agents: 3 };
        assert_eq!(ex.predicted_length(1), None);
        assert_eq!(ex.family(), Family::ExponentialGap);
    }
}
