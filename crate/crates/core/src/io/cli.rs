//! Command-line front end. Exit status: 0 success, 1 domain failure (invalid
//! instance, envy, infeasible, unreachable, invalid sequence), 2 usage or parse error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::dot::item_graph_dot;
use super::format::{
    describe_exchange_error, describe_model_error, format_matching, parse_matching_pairs, FormatError, InstanceFile,
    InstanceRef, SequenceFile,
};
use crate::engine::{
    compute_reformist, is_reachable, reformist_matching, verify_sequence, NominationPolicy, VerifyFailure,
};
use crate::factory::{self, graph::parse_graph, CertificateSequence, Generated, Graph, RandomConfig};
use crate::model::{envy_pairs, Instance, Matching, ReformSequence};
use crate::solvers::{solve, Algorithm, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "reformist", version, about = "Reformist envy-free matchings and shortest reformist sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file and report envy in its initial matching.
    Validate { instance: PathBuf },
    /// Run improvement steps until no agent can move.
    Reform {
        instance: PathBuf,
        /// best-first, round-robin, random, or order:A,B,... (agent names, by priority)
        #[arg(long, default_value = "best-first")]
        policy: String,
        /// Seed for the random policy.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the sequence file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a shortest reformist sequence.
    Shortest {
        instance: PathBuf,
        #[arg(long, default_value = "auto")]
        algo: Algorithm,
        /// State budget for the exhaustive search.
        #[arg(long)]
        budget: Option<usize>,
        /// Only accept sequences of at most this length.
        #[arg(long)]
        decision: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a target matching can be reached by improvement steps.
    Reachable {
        instance: PathBuf,
        /// Target as agent=item pairs separated by commas.
        #[arg(long)]
        target: String,
    },
    /// Generate an instance.
    Gen(GenArgs),
    /// Print the item graph in DOT.
    ExportDot {
        instance: PathBuf,
        /// initial, reformist, or agent=item pairs; draws tokens on held items.
        #[arg(long)]
        matching: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a sequence file against an instance.
    Verify { instance: PathBuf, sequence: PathBuf },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    /// Write the instance here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the certificate sequence here (needs a witness).
    #[arg(long, global = true)]
    certificate: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GraphSource {
    /// Graph file: JSON {vertices, edges, parts?} or an edge list.
    #[arg(long, conflicts_with = "complete")]
    graph: Option<PathBuf>,
    /// Use the complete graph on this many vertices.
    #[arg(long)]
    complete: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Three agents whose slowest and shortest sequences differ by a factor of p.
    ExponentialGap {
        #[arg(long)]
        p: usize,
    },
    /// Reduction from vertex cover on a 3-regular graph.
    VertexCover {
        #[command(flatten)]
        source: GraphSource,
        /// Cover vertices for the certificate sequence.
        #[arg(long, value_delimiter = ',')]
        cover: Option<Vec<usize>>,
    },
    /// Reduction from set cover.
    SetCover {
        /// Sets separated by ';', elements by ',' (e.g. "1,2;2,3").
        #[arg(long)]
        sets: String,
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// 0-based indices of the chosen sets.
        #[arg(long, value_delimiter = ',')]
        cover: Option<Vec<usize>>,
    },
    /// Reduction from multicolored clique.
    Clique {
        #[command(flatten)]
        source: GraphSource,
        /// Part of each vertex; defaults to the graph file's parts, or one part per vertex.
        #[arg(long, value_delimiter = ',')]
        parts: Option<Vec<usize>>,
        /// Clique vertices for the certificate sequence.
        #[arg(long, value_delimiter = ',')]
        clique: Option<Vec<usize>>,
    },
    /// Random instance with an envy-free initial matching.
    Random {
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        max_acceptors: Option<usize>,
        #[arg(long)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
    /// The reader went away; stop quietly.
    ClosedPipe,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        if e.is_parse() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = match cli.command {
        Command::Validate { instance } => cmd_validate(&instance, out),
        Command::Reform { instance, policy, seed, out: path } => {
            cmd_reform(&instance, &policy, seed, path.as_deref(), out)
        }
        Command::Shortest { instance, algo, budget, decision, out: path } => {
            cmd_shortest(&instance, algo, budget, decision, path.as_deref(), out)
        }
        Command::Reachable { instance, target } => cmd_reachable(&instance, &target, out),
        Command::Gen(args) => cmd_gen(args, out),
        Command::ExportDot { instance, matching, out: path } => {
            cmd_export_dot(&instance, matching.as_deref(), path.as_deref(), out)
        }
        Command::Verify { instance, sequence } => cmd_verify(&instance, &sequence, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::ClosedPipe) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_file(path: &Path) -> Result<InstanceFile, Failure> {
    InstanceFile::parse(&read(path)?).map_err(|e| match e {
        FormatError::Parse(_) | FormatError::Version(_) => Failure::Usage(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

fn load(path: &Path) -> Result<(InstanceFile, Instance, Matching), Failure> {
    let file = load_file(path)?;
    let (inst, mu) = file.to_model()?;
    Ok((file, inst, mu))
}

fn require_envy_free(inst: &Instance, mu: &Matching) -> Result<(), Failure> {
    match envy_pairs(inst, mu) {
        Ok(pairs) if pairs.is_empty() => Ok(()),
        Ok(pairs) => {
            let (i, j) = pairs[0];
            Err(Failure::Domain(format!(
                "initial matching is not envy-free: agent {} envies agent {}",
                inst.agent_name(i),
                inst.agent_name(j)
            )))
        }
        Err(e) => Err(Failure::Domain(describe_model_error(inst, &e))),
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_steps(out: &mut dyn Write, inst: &Instance, seq: &ReformSequence) -> std::io::Result<()> {
    for s in &seq.steps {
        writeln!(
            out,
            "  {}: {} -> {}",
            inst.agent_name(s.agent),
            inst.item_name(s.from_item),
            inst.item_name(s.to_item)
        )?;
    }
    Ok(())
}

fn instance_ref(path: &Path, file: &InstanceFile) -> InstanceRef {
    InstanceRef { path: Some(path.display().to_string()), sha256: Some(file.sha256()) }
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> CmdResult {
    let file = load_file(path)?;
    let violations = file.violations();
    if !violations.is_empty() {
        writeln!(out, "invalid instance")?;
        for v in violations {
            writeln!(out, "  {v}")?;
        }
        return Ok(EXIT_FAILURE);
    }
    let (inst, mu) = file.to_model()?;
    let pairs = envy_pairs(&inst, &mu).map_err(|e| Failure::Domain(describe_model_error(&inst, &e)))?;
    if pairs.is_empty() {
        writeln!(out, "ok: {} agents, {} items, initial matching is envy-free", inst.num_agents(), inst.num_items())?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "initial matching is not envy-free")?;
    for (i, j) in pairs {
        writeln!(out, "  envy ({},{})", inst.agent_name(i), inst.agent_name(j))?;
    }
    Ok(EXIT_FAILURE)
}

fn parse_policy(inst: &Instance, text: &str, seed: Option<u64>) -> Result<NominationPolicy, Failure> {
    match text {
        "best-first" => Ok(NominationPolicy::BestFirst),
        "round-robin" => Ok(NominationPolicy::RoundRobin),
        "random" => seed
            .map(|seed| NominationPolicy::Random { seed })
            .ok_or_else(|| Failure::Usage("the random policy needs --seed".into())),
        _ => {
            let list = text.strip_prefix("order:").ok_or_else(|| Failure::Usage(format!("unknown policy {text:?}")))?;
            let order = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|a| inst.agent_id(a).ok_or_else(|| Failure::Usage(format!("unknown agent {a:?} in policy"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NominationPolicy::FixedOrder(order))
        }
    }
}

fn cmd_reform(path: &Path, policy: &str, seed: Option<u64>, seq_out: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let (file, inst, mu) = load(path)?;
    let policy = parse_policy(&inst, policy, seed)?;
    require_envy_free(&inst, &mu)?;
    let (sigma, seq) = compute_reformist(&inst, &mu, &policy).map_err(|e| Failure::Domain(e.to_string()))?;
    writeln!(out, "final: {}", format_matching(&inst, &sigma))?;
    writeln!(out, "steps: {}", seq.len())?;
    write_steps(out, &inst, &seq)?;
    if let Some(p) = seq_out {
        write_out(p, &SequenceFile::from_sequence(&inst, &seq, instance_ref(path, &file), None).to_text())?;
    }
    Ok(EXIT_OK)
}

fn cmd_shortest(
    path: &Path,
    algo: Algorithm,
    budget: Option<usize>,
    decision: Option<usize>,
    seq_out: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let (file, inst, mu) = load(path)?;
    require_envy_free(&inst, &mu)?;
    let mut opts = SolveOptions { max_length: decision, ..SolveOptions::default() };
    if let Some(b) = budget {
        opts.bfs_state_budget = b;
    }
    let res = solve(&inst, &mu, algo, &opts).map_err(|e| Failure::Domain(e.to_string()))?;
    let solver = res.stats.solver.map_or("none", Algorithm::name);
    let Some(seq) = res.sequence else {
        writeln!(out, "infeasible")?;
        writeln!(out, "solver: {solver}")?;
        return Ok(EXIT_FAILURE);
    };
    writeln!(out, "length: {}", seq.len())?;
    writeln!(out, "solver: {solver}")?;
    write_steps(out, &inst, &seq)?;
    if let Some(p) = seq_out {
        write_out(p, &SequenceFile::from_sequence(&inst, &seq, instance_ref(path, &file), None).to_text())?;
    }
    Ok(EXIT_OK)
}

fn cmd_reachable(path: &Path, target: &str, out: &mut dyn Write) -> CmdResult {
    let (_, inst, mu) = load(path)?;
    let tau = parse_matching_pairs(&inst, target)?;
    require_envy_free(&inst, &mu)?;
    let yes = is_reachable(&inst, &mu, &tau).map_err(|e| match e {
        crate::engine::EngineError::Model(m) => Failure::Domain(format!("target: {}", describe_model_error(&inst, &m))),
        other => Failure::Domain(other.to_string()),
    })?;
    writeln!(out, "{}", if yes { "yes" } else { "no" })?;
    Ok(if yes { EXIT_OK } else { EXIT_FAILURE })
}

fn load_graph(src: &GraphSource) -> Result<(Graph, Option<Vec<usize>>), Failure> {
    match (&src.graph, src.complete) {
        (Some(p), None) => parse_graph(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        (None, Some(n)) => Ok((Graph::complete(n), None)),
        _ => Err(Failure::Usage("give exactly one of --graph or --complete".into())),
    }
}

fn parse_sets(text: &str) -> Result<Vec<Vec<u64>>, Failure> {
    text.split(';')
        .map(|set| {
            set.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|v| v.parse::<u64>().map_err(|_| Failure::Usage(format!("bad element {v:?}"))))
                .collect()
        })
        .collect()
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> CmdResult {
    let (inst, mu, cert): (Instance, Matching, Option<CertificateSequence>) = match args.family {
        Family::ExponentialGap { p } => {
            let (inst, mu) = factory::gen_exponential_gap(p).map_err(domain)?;
            (inst, mu, None)
        }
        Family::VertexCover { source, cover } => {
            let (g, _) = load_graph(&source)?;
            let gen = factory::gen_vertex_cover(&g).map_err(domain)?;
            certified(gen, cover.as_deref(), factory::claim1_sequence)?
        }
        Family::SetCover { sets, p, cover } => {
            let gen = factory::gen_set_cover(&parse_sets(&sets)?, p).map_err(domain)?;
            certified(gen, cover.as_deref(), factory::claim3_sequence)?
        }
        Family::Clique { source, parts, clique } => {
            let (g, file_parts) = load_graph(&source)?;
            let parts = parts.or(file_parts).unwrap_or_else(|| (0..g.num_vertices()).collect());
            let k = parts.iter().max().map_or(0, |&m| m + 1);
            let gen = factory::gen_multicolored_clique(&g, &parts, k).map_err(domain)?;
            certified(gen, clique.as_deref(), factory::clique_sequence)?
        }
        Family::Random { agents, items, max_len, max_acceptors, seed } => {
            let mut cfg = RandomConfig::new(agents, items, max_len, seed);
            cfg.max_acceptors = max_acceptors;
            let (inst, mu) = factory::gen_random(&cfg).map_err(domain)?;
            (inst, mu, None)
        }
    };
    let file = InstanceFile::from_model(&inst, &mu);
    let text = file.to_text();
    match &args.out {
        Some(p) => {
            write_out(p, &text)?;
            writeln!(out, "{} agents, {} items", inst.num_agents(), inst.num_items())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    match (cert, &args.certificate) {
        (Some(c), Some(p)) => {
            let r =
                InstanceRef { path: args.out.as_ref().map(|o| o.display().to_string()), sha256: Some(file.sha256()) };
            write_out(p, &SequenceFile::from_sequence(&inst, &c.sequence, r, Some(&c.phases)).to_text())?;
            if args.out.is_some() {
                writeln!(out, "certificate: {} steps", c.len())?;
            }
        }
        (None, Some(_)) => return Err(Failure::Usage("--certificate needs a witness (--cover or --clique)".into())),
        _ => {}
    }
    Ok(EXIT_OK)
}

fn certified(
    gen: Generated,
    witness: Option<&[usize]>,
    build: fn(&Generated, &[usize]) -> Result<CertificateSequence, factory::FactoryError>,
) -> Result<(Instance, Matching, Option<CertificateSequence>), Failure> {
    let cert = witness.map(|w| build(&gen, w)).transpose().map_err(domain)?;
    Ok((gen.instance, gen.initial, cert))
}

fn cmd_export_dot(path: &Path, matching: Option<&str>, dot_out: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let (_, inst, mu) = load(path)?;
    let tokens = match matching {
        None => None,
        Some("initial") => Some(mu),
        Some("reformist") => {
            require_envy_free(&inst, &mu)?;
            Some(reformist_matching(&inst, &mu).map_err(domain)?)
        }
        Some(pairs) => Some(parse_matching_pairs(&inst, pairs)?),
    };
    let dot = item_graph_dot(&inst, tokens.as_ref());
    match dot_out {
        Some(p) => write_out(p, &dot)?,
        None => out.write_all(dot.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cmd_verify(inst_path: &Path, seq_path: &Path, out: &mut dyn Write) -> CmdResult {
    let (file, inst, _) = load(inst_path)?;
    let seq_file = SequenceFile::parse(&read(seq_path)?).map_err(|e| match e {
        FormatError::Parse(_) | FormatError::Version(_) => Failure::Usage(format!("{}: {e}", seq_path.display())),
        other => other.into(),
    })?;
    if let Some(h) = &seq_file.instance.sha256 {
        if *h != file.sha256() {
            writeln!(out, "invalid: sequence was recorded for a different instance (sha256 mismatch)")?;
            return Ok(EXIT_FAILURE);
        }
    }
    let seq = seq_file.to_sequence(&inst)?;
    let report = verify_sequence(&inst, &seq);
    match &report.failure {
        None => {
            writeln!(out, "valid: {} steps", seq.len())?;
            let end = if report.terminal { "reformist matching" } else { "non-terminal matching" };
            writeln!(out, "ends at {end}: {}", format_matching(&inst, report.reached.as_ref().expect("valid replay")))?;
            Ok(EXIT_OK)
        }
        Some(VerifyFailure::Initial(e)) => {
            writeln!(out, "invalid initial matching: {}", describe_model_error(&inst, e))?;
            Ok(EXIT_FAILURE)
        }
        Some(VerifyFailure::Step { index, error }) => {
            writeln!(out, "invalid at step {index}: {}", describe_exchange_error(&inst, error))?;
            Ok(EXIT_FAILURE)
        }
    }
}
