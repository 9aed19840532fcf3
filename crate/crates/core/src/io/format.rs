//! JSON instance and sequence files.

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    validate_instance, ExchangeError, ExchangeStep, Instance, Matching, ModelError, RawAgent, RawInstance,
    ReformSequence, Violation,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid instance: {}", list(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid matching: {0}")]
    Matching(String),
    #[error("invalid step {index}: {reason}")]
    Step { index: usize, reason: String },
}

fn list(vs: &[Violation]) -> String {
    vs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl FormatError {
    /// Syntax errors are usage failures; everything else is a domain failure.
    pub fn is_parse(&self) -> bool {
        matches!(self, FormatError::Parse(_) | FormatError::Version(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub name: String,
    pub prefs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub items: Vec<String>,
    pub agents: Vec<AgentEntry>,
    pub initial_matching: IndexMap<String, String>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(FormatError::Version(file.version));
        }
        Ok(file)
    }

    pub fn from_model(inst: &Instance, mu: &Matching) -> Self {
        let raw = inst.to_raw();
        InstanceFile {
            version: FORMAT_VERSION,
            items: raw.items,
            agents: raw.agents.into_iter().map(|a| AgentEntry { name: a.name, prefs: a.prefs }).collect(),
            initial_matching: matching_map(inst, mu),
        }
    }

    pub fn raw(&self) -> RawInstance {
        RawInstance {
            items: self.items.clone(),
            agents: self.agents.iter().map(|a| RawAgent { name: a.name.clone(), prefs: a.prefs.clone() }).collect(),
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        validate_instance(&self.raw())
    }

    pub fn instance(&self) -> Result<Instance, FormatError> {
        self.raw().build().map_err(|e| FormatError::Invalid(e.0))
    }

    /// The instance and its initial matching. The matching need not be envy-free.
    pub fn to_model(&self) -> Result<(Instance, Matching), FormatError> {
        let inst = self.instance()?;
        let mu = parse_matching_map(&inst, &self.initial_matching)?;
        Ok((inst, mu))
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

pub fn matching_map(inst: &Instance, mu: &Matching) -> IndexMap<String, String> {
    (0..inst.num_agents()).map(|i| (inst.agent_name(i).to_string(), inst.item_name(mu.item(i)).to_string())).collect()
}

pub fn parse_matching_map(inst: &Instance, map: &IndexMap<String, String>) -> Result<Matching, FormatError> {
    let mut items = vec![None; inst.num_agents()];
    for (a, x) in map {
        let i = inst.agent_id(a).ok_or_else(|| FormatError::Matching(format!("unknown agent {a:?}")))?;
        let y = inst.item_id(x).ok_or_else(|| FormatError::Matching(format!("unknown item {x:?}")))?;
        items[i] = Some(y);
    }
    let items: Vec<usize> = items
        .into_iter()
        .enumerate()
        .map(|(i, y)| y.ok_or_else(|| FormatError::Matching(format!("agent {:?} is unmatched", inst.agent_name(i)))))
        .collect::<Result<_, _>>()?;
    Matching::new(inst, items).map_err(|e| FormatError::Matching(describe_model_error(inst, &e)))
}

/// Parses `agent=item` pairs separated by commas.
pub fn parse_matching_pairs(inst: &Instance, text: &str) -> Result<Matching, FormatError> {
    let mut map = IndexMap::new();
    for pair in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, x) =
            pair.split_once('=').ok_or_else(|| FormatError::Matching(format!("expected agent=item, got {pair:?}")))?;
        map.insert(a.trim().to_string(), x.trim().to_string());
    }
    parse_matching_map(inst, &map)
}

pub fn describe_model_error(inst: &Instance, e: &ModelError) -> String {
    let a = |i: usize| inst.agent_name(i);
    let x = |y: usize| inst.item_name(y);
    match *e {
        ModelError::WrongLength { expected, found } => format!("{found} entries for {expected} agents"),
        ModelError::NotAcceptable { agent, item } => format!("agent {} does not accept {}", a(agent), x(item)),
        ModelError::NotInjective { item, first, second } => {
            format!("item {} assigned to both {} and {}", x(item), a(first), a(second))
        }
        ModelError::NotEnvyFree { envier, envied } => format!("agent {} envies agent {}", a(envier), a(envied)),
    }
}

pub fn describe_exchange_error(inst: &Instance, e: &ExchangeError) -> String {
    let a = |i: usize| inst.agent_name(i);
    let x = |y: usize| inst.item_name(y);
    match *e {
        ExchangeError::UnknownAgent(i) => format!("agent #{i} does not exist"),
        ExchangeError::WrongFromItem { agent, holds, claimed } => {
            format!("agent {} holds {}, not {}", a(agent), x(holds), x(claimed))
        }
        ExchangeError::NotAcceptable { agent, item } => format!("agent {} does not accept {}", a(agent), x(item)),
        ExchangeError::NotUnassigned { item, owner } => format!("{} is not unassigned (held by {})", x(item), a(owner)),
        ExchangeError::NotImproving { agent, from, to } => {
            format!("agent {} does not prefer {} to {}", a(agent), x(to), x(from))
        }
        ExchangeError::CreatesEnvy { envier, envied } => format!("creates envy ({},{})", a(envier), a(envied)),
    }
}

pub fn format_matching(inst: &Instance, mu: &Matching) -> String {
    let mut s = String::new();
    for i in 0..inst.num_agents() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{}->{}", inst.agent_name(i), inst.item_name(mu.item(i)));
    }
    s
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub agent: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub version: u32,
    pub instance: InstanceRef,
    pub initial_matching: IndexMap<String, String>,
    pub steps: Vec<StepEntry>,
}

impl SequenceFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let file: SequenceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(FormatError::Version(file.version));
        }
        Ok(file)
    }

    pub fn from_sequence(
        inst: &Instance,
        seq: &ReformSequence,
        instance: InstanceRef,
        phases: Option<&[String]>,
    ) -> Self {
        let steps = seq
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| StepEntry {
                agent: inst.agent_name(s.agent).to_string(),
                from: inst.item_name(s.from_item).to_string(),
                to: inst.item_name(s.to_item).to_string(),
                phase: phases.and_then(|p| p.get(k).cloned()),
            })
            .collect();
        SequenceFile { version: FORMAT_VERSION, instance, initial_matching: matching_map(inst, &seq.initial), steps }
    }

    /// Resolves names against `inst`. Step legality is left to `verify_sequence`.
    pub fn to_sequence(&self, inst: &Instance) -> Result<ReformSequence, FormatError> {
        let initial = parse_matching_map(inst, &self.initial_matching)?;
        let mut steps = Vec::with_capacity(self.steps.len());
        for (index, s) in self.steps.iter().enumerate() {
            let bad = |what: &str, name: &str| FormatError::Step { index, reason: format!("unknown {what} {name:?}") };
            let agent = inst.agent_id(&s.agent).ok_or_else(|| bad("agent", &s.agent))?;
            let from = inst.item_id(&s.from).ok_or_else(|| bad("item", &s.from))?;
            let to = inst.item_id(&s.to).ok_or_else(|| bad("item", &s.to))?;
            steps.push(ExchangeStep::new(agent, from, to));
        }
        Ok(ReformSequence { initial, steps })
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
