use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use limsup_core::algebra::{algebra, verify_algebra};
use limsup_core::automaton::AutomatonDoc;
use limsup_core::construct::{minimize, CheckStatus, ConstructedU, ConstructionReport};
use limsup_core::corpus::{random_fsm_i, random_fsm_ii, sample_branches, Streams};
use limsup_core::family::check_family_invariants;
use limsup_core::game::export::{trace_csv, trace_sidecar_json};
use limsup_core::game::{judge, Diagnostics};
use limsup_core::strategies::{
    ConstantI, ConstantII, DyadicSpiral, EventuallyZeroIndicator, OrderMap, RelabeledStrategy, SPIRAL_CAP,
};
use limsup_core::{
    approx_copycat, copycat_strategy, discretize, eventually_zero_instance, exact_run, family_from_automaton,
    indicator_oscillation_instance, lift_strategy, pair_strategies, play, relabel_strategy, strategy_i_meager_dense,
    strategy_i_oscillation, strategy_ii_from_u, BranchFunction, Dyadic, Error, EventuallyPeriodicBranch, FullTree,
    GameKind, IIMove, NodeAutomaton, Outcome, Prefix, RunTrace, StateDescriptor, StrategyI, StrategyII, ValueSet,
    Verdict,
};

use crate::config::{ExperimentConfig, FunctionSpec, GameSpec, MachineRef, Stage, StrategySpec, TraceFormat, TreeChoice};
use crate::suite::{run_suite, SuiteOptions, DEFAULT_SEED};

/// Lookahead, check depth and state bound used when exporting a constructed `u`.
const MINIMIZE_LOOKAHEAD: usize = 4;
const MINIMIZE_CHECK_DEPTH: usize = 8;
const MINIMIZE_MAX_STATES: usize = 64;

/// Depth of the prefix sample checked by the `regularize` stage.
const REGULARIZE_SAMPLE_DEPTH: usize = 4;
const REGULARIZE_SAMPLE_LEVELS: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "limsup", version, about = "Limsup functions on trees and the games that characterize them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the limsup of a machine's outputs along an eventually periodic branch.
    Eval {
        /// Machine JSON file.
        automaton: PathBuf,
        /// Branch as `stem=1,0;cycle=0,1`.
        branch: String,
    },
    /// Play a configured game for `horizon` rounds and write the trace.
    Play(Common),
    /// Play until the joint state repeats and print the exact verdict.
    Verify(Common),
    /// Run a construction pipeline and check it on a branch corpus.
    Construct(Common),
    /// Run the acceptance suite.
    Suite {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub trace: Option<TraceArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TraceArg {
    Csv,
    Json,
    None,
}

impl From<TraceArg> for TraceFormat {
    fn from(t: TraceArg) -> TraceFormat {
        match t {
            TraceArg::Csv => TraceFormat::Csv,
            TraceArg::Json => TraceFormat::Json,
            TraceArg::None => TraceFormat::None,
        }
    }
}

/// Why a command stopped early. Usage and contract errors exit with 2,
/// failures with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Contract(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) | CliError::Contract(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Contract(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Contract(e.to_string())
    }
}

/// What a command printed and how it ends.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: Vec<String>,
    pub stderr: Vec<String>,
    pub code: i32,
}

impl Output {
    fn line(&mut self, s: impl Into<String>) {
        self.stdout.push(s.into());
    }
}

pub fn execute(cli: Cli) -> Output {
    let mut out = Output::default();
    let result = match cli.command {
        Command::Eval { automaton, branch } => cmd_eval(&automaton, &branch, &mut out),
        Command::Play(c) => load(&c).and_then(|cfg| cmd_play(&cfg, &mut out)),
        Command::Verify(c) => load(&c).and_then(|cfg| cmd_verify(&cfg, &mut out)),
        Command::Construct(c) => load(&c).and_then(|cfg| cmd_construct(&cfg, &mut out)),
        Command::Suite { seed } => cmd_suite(seed, &mut out),
    };
    if let Err(e) = result {
        out.stderr.push(format!("error: {}", e.message()));
        out.code = e.exit_code();
    }
    out
}

/// Reads the config and applies the command-line overrides.
pub fn load(c: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&c.config).map_err(CliError::Usage)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(h) = c.horizon {
        cfg.horizon = h;
    }
    if let Some(cap) = c.cap {
        cfg.cap = cap;
    }
    if let Some(dir) = &c.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(t) = c.trace {
        cfg.output.trace = t.into();
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

pub fn cmd_eval(path: &Path, branch: &str, out: &mut Output) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let u = NodeAutomaton::from_json(&text)?;
    let x: EventuallyPeriodicBranch = branch.parse()?;
    let (v, summary) = u.eval_limsup(&x)?;
    out.line(v.to_string());
    let cycle: Vec<String> = summary.cycle_outputs.iter().map(|d| d.to_string()).collect();
    out.line(format!("lasso start={} period={} cycle_outputs=[{}]", summary.start(), summary.period(), cycle.join(", ")));
    Ok(())
}

fn tree_of(choice: &TreeChoice) -> FullTree {
    match choice {
        TreeChoice::Binary => FullTree::BINARY,
        TreeChoice::Naturals => FullTree::NATURALS,
        TreeChoice::Arity(k) => FullTree::with_arity(*k),
    }
}

/// Letters a generated machine distinguishes before its default class.
fn declared_letters(choice: &TreeChoice) -> u64 {
    match choice {
        TreeChoice::Binary | TreeChoice::Naturals => 2,
        TreeChoice::Arity(k) => *k,
    }
}

pub fn resolve_machine(m: &MachineRef) -> Result<NodeAutomaton, CliError> {
    Ok(match m {
        MachineRef::Path(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            NodeAutomaton::from_json(&text)?
        }
        MachineRef::Inline(doc) => NodeAutomaton::try_from(doc.clone())?,
        MachineRef::LetterOutput(k) => NodeAutomaton::letter_output(*k),
        MachineRef::Flip => NodeAutomaton::from_fn(1, 2, |_, a| (0, Dyadic::from_int(1 - a as i128)))?,
        MachineRef::Constant(c) => NodeAutomaton::constant(*c, 2),
    })
}

fn game_kind(spec: &GameSpec) -> GameKind {
    match spec {
        GameSpec::Gamma => GameKind::Gamma,
        GameSpec::GammaPrime => GameKind::GammaPrime,
        GameSpec::GammaRestricted { values } => GameKind::GammaRestricted(ValueSet::finite(values.iter().copied())),
    }
}

/// The payoff function of a game, and the machine behind it when there is one.
fn payoff(spec: &FunctionSpec) -> Result<(Box<dyn BranchFunction>, Option<NodeAutomaton>), CliError> {
    match spec {
        FunctionSpec::Machine(m) => {
            let u = resolve_machine(m)?;
            Ok((Box::new(u.clone()), Some(u)))
        }
        FunctionSpec::EventuallyZero => Ok((Box::new(EventuallyZeroIndicator), None)),
        FunctionSpec::Pipeline(_) => Err(CliError::Usage("games need a machine or a named function, not a pipeline".into())),
    }
}

fn build_i(spec: &StrategySpec, cfg: &ExperimentConfig) -> Result<Box<dyn StrategyI>, CliError> {
    Ok(match spec {
        StrategySpec::MeagerDense => Box::new(strategy_i_meager_dense(Arc::new(eventually_zero_instance()))),
        StrategySpec::Oscillation => Box::new(strategy_i_oscillation(Arc::new(indicator_oscillation_instance()))),
        StrategySpec::Copycat => Box::new(copycat_strategy()),
        StrategySpec::ApproxCopycat { search_cap } => {
            Box::new(approx_copycat(Arc::new(DyadicSpiral::new(search_cap.unwrap_or(SPIRAL_CAP)))))
        }
        StrategySpec::Lift { values, inner } => {
            Box::new(lift_strategy(build_i(inner, cfg)?, ValueSet::finite(values.iter().copied())))
        }
        StrategySpec::Relabel { map, inner } => {
            let map = OrderMap::new(map.clone())?;
            let s: RelabeledStrategy<_> = relabel_strategy(build_i(inner, cfg)?, map);
            Box::new(s)
        }
        StrategySpec::Constant { letter, .. } => Box::new(ConstantI(letter.unwrap_or(0))),
        StrategySpec::RandomFsm { states, values, seed } => {
            let mut rng = Streams::new(cfg.seed).stream(&format!("opponents/{seed}"));
            let pairs = matches!(cfg.game, GameSpec::GammaPrime);
            Box::new(random_fsm_i(&mut rng, (*states).max(1), declared_letters(&cfg.tree), values, pairs))
        }
        other => return Err(CliError::Usage(format!("{} is not a Player I strategy", kind_name(other)))),
    })
}

fn build_ii(spec: &StrategySpec, cfg: &ExperimentConfig, f_machine: Option<&NodeAutomaton>) -> Result<Box<dyn StrategyII>, CliError> {
    Ok(match spec {
        StrategySpec::FromU { machine } => {
            let u = match (machine, f_machine) {
                (Some(m), _) => resolve_machine(m)?,
                (None, Some(u)) => u.clone(),
                (None, None) => return Err(CliError::Usage("from_u needs a machine when the function has none".into())),
            };
            Box::new(strategy_ii_from_u(&u))
        }
        StrategySpec::Pair { first, second } => {
            Box::new(pair_strategies(build_ii(first, cfg, f_machine)?, build_ii(second, cfg, f_machine)?))
        }
        StrategySpec::Constant { value, w, .. } => {
            let v = value.unwrap_or(Dyadic::ZERO);
            Box::new(ConstantII(match w {
                Some(w) => IIMove::Pair(v, *w),
                None if matches!(cfg.game, GameSpec::GammaPrime) => IIMove::Pair(v, v),
                None => IIMove::Single(v),
            }))
        }
        StrategySpec::RandomFsm { states, values, seed } => {
            if values.is_empty() {
                return Err(CliError::Usage("random_fsm for Player II needs at least one value".into()));
            }
            let mut rng = Streams::new(cfg.seed).stream(&format!("opponents/{seed}"));
            let pairs = matches!(cfg.game, GameSpec::GammaPrime);
            Box::new(random_fsm_ii(&mut rng, (*states).max(1), declared_letters(&cfg.tree), values, pairs))
        }
        other => return Err(CliError::Usage(format!("{} is not a Player II strategy", kind_name(other)))),
    })
}

fn kind_name(spec: &StrategySpec) -> &'static str {
    match spec {
        StrategySpec::FromU { .. } => "from_u",
        StrategySpec::MeagerDense => "meager_dense",
        StrategySpec::Oscillation => "oscillation",
        StrategySpec::Copycat => "copycat",
        StrategySpec::ApproxCopycat { .. } => "approx_copycat",
        StrategySpec::Lift { .. } => "lift",
        StrategySpec::Relabel { .. } => "relabel",
        StrategySpec::Pair { .. } => "pair",
        StrategySpec::Constant { .. } => "constant",
        StrategySpec::RandomFsm { .. } => "random_fsm",
    }
}

struct Match {
    kind: GameKind,
    tree: FullTree,
    f: Box<dyn BranchFunction>,
    s1: Box<dyn StrategyI>,
    s2: Box<dyn StrategyII>,
}

fn setup(cfg: &ExperimentConfig) -> Result<Match, CliError> {
    let (f, f_machine) = payoff(&cfg.function)?;
    let spec_i = cfg.player_i.as_ref().ok_or_else(|| CliError::Usage("player_i is missing".into()))?;
    let spec_ii = cfg.player_ii.as_ref().ok_or_else(|| CliError::Usage("player_ii is missing".into()))?;
    Ok(Match {
        kind: game_kind(&cfg.game),
        tree: tree_of(&cfg.tree),
        s1: build_i(spec_i, cfg)?,
        s2: build_ii(spec_ii, cfg, f_machine.as_ref())?,
        f,
    })
}

fn outcome_name(o: &Outcome) -> String {
    match o {
        Outcome::WinII => "WinII".into(),
        Outcome::WinI => "WinI".into(),
        Outcome::UndecidedAtHorizon(h) => format!("UndecidedAtHorizon({h})"),
    }
}

fn report_run(trace: &RunTrace, verdict: &Verdict, out: &mut Output) {
    out.line(format!("rounds {}", trace.rounds.len()));
    match &trace.lasso {
        Some(l) => out.line(format!("lasso start={} period={}", l.start, l.period)),
        None => out.line("lasso none"),
    }
    out.line(format!("verdict {}", outcome_name(&verdict.outcome)));
    if let Some(w) = &verdict.witness {
        let mut s = format!("witness f={} limsup_v={}", w.f, w.limsup_v);
        if let Some(lw) = w.liminf_w {
            s.push_str(&format!(" liminf_w={lw}"));
        }
        out.line(s);
    }
    let switches = trace.rounds.last().map_or(0, |r| r.report.switches);
    out.line(format!("switches {switches}"));
    if let Some(d) = &verdict.diagnostics {
        out.line(format!("diagnostics {}", serde_json::to_string(d).expect("diagnostics serialize")));
    }
    if let Some(fault) = &trace.fault {
        out.stderr.push(json!({ "fault": fault }).to_string());
    }
}

fn write_outputs(cfg: &ExperimentConfig, trace: &RunTrace, verdict: &Verdict) -> Result<(), CliError> {
    let dir = &cfg.output.dir;
    let stem = &cfg.output.stem;
    let io = |e: std::io::Error| CliError::Contract(format!("{}: {e}", dir.display()));
    match cfg.output.trace {
        TraceFormat::None => return Ok(()),
        TraceFormat::Csv => {
            std::fs::create_dir_all(dir).map_err(io)?;
            std::fs::write(dir.join(format!("{stem}.csv")), trace_csv(trace)).map_err(io)?;
        }
        TraceFormat::Json => {
            std::fs::create_dir_all(dir).map_err(io)?;
            let body = serde_json::to_string_pretty(trace).expect("trace serializes");
            std::fs::write(dir.join(format!("{stem}.trace.json")), body + "\n").map_err(io)?;
        }
    }
    std::fs::write(dir.join(format!("{stem}.json")), trace_sidecar_json(trace, Some(verdict)) + "\n").map_err(io)?;
    Ok(())
}

pub fn cmd_play(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let mut m = setup(cfg)?;
    let trace = play(&m.kind, &m.tree, m.s1.as_mut(), m.s2.as_mut(), cfg.horizon);
    let reason = "horizon reached without a checkable repetition of the joint state";
    let verdict = match judge(&trace, m.f.as_ref(), reason) {
        Ok(v) => v,
        Err(Error::Certificate(_)) => Verdict {
            outcome: Outcome::UndecidedAtHorizon(trace.rounds.len()),
            witness: None,
            lasso: None,
            diagnostics: Some(Diagnostics::of(&trace, reason)),
            fault: None,
        },
        Err(e) => return Err(e.into()),
    };
    report_run(&trace, &verdict, out);
    write_outputs(cfg, &trace, &verdict)
}

pub fn cmd_verify(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let mut m = setup(cfg)?;
    for (who, d) in [("Player I", m.s1.descriptor()), ("Player II", m.s2.descriptor())] {
        if d == StateDescriptor::Unbounded {
            return Err(CliError::Contract(format!("verify needs finite-state strategies; {who} declares unbounded state")));
        }
    }
    let (trace, verdict) = exact_run(&m.kind, &m.tree, m.s1.as_mut(), m.s2.as_mut(), m.f.as_ref(), cfg.cap)?;
    report_run(&trace, &verdict, out);
    write_outputs(cfg, &trace, &verdict)?;
    if let Outcome::UndecidedAtHorizon(n) = verdict.outcome {
        return Err(CliError::Failure(format!("no exact verdict within {n} rounds")));
    }
    Ok(())
}

enum Plan {
    Single { machine: NodeAutomaton, check: bool },
    Algebra { op: limsup_core::algebra::AlgebraOp, left: NodeAutomaton, right: NodeAutomaton },
}

fn plan(stages: &[Stage]) -> Result<Plan, CliError> {
    let bad = |why: &str| CliError::Usage(format!("pipeline {why}; expected from_automaton, [regularize], discretize, construct_u or algebra, [construct_u]"));
    match stages {
        [] => Err(CliError::Usage("empty pipeline".into())),
        [Stage::Algebra { op, left, right }] | [Stage::Algebra { op, left, right }, Stage::ConstructU] => {
            Ok(Plan::Algebra { op: *op, left: resolve_machine(left)?, right: resolve_machine(right)? })
        }
        [Stage::FromAutomaton { machine }, rest @ ..] => {
            let check = match rest {
                [Stage::Regularize, Stage::Discretize, Stage::ConstructU] => true,
                [Stage::Discretize, Stage::ConstructU] => false,
                _ => return Err(bad("stages are out of order")),
            };
            Ok(Plan::Single { machine: resolve_machine(machine)?, check })
        }
        _ => Err(bad("must start with from_automaton or algebra")),
    }
}

fn all_prefixes(letters: u64, depth: usize) -> Vec<Prefix> {
    let mut level = vec![Prefix::empty()];
    let mut all = level.clone();
    for _ in 0..depth {
        level = level.iter().flat_map(|s| (0..letters).map(move |a| s.extend(a))).collect();
        all.extend(level.iter().cloned());
    }
    all
}

fn summarize(report: &ConstructionReport, out: &mut Output) -> bool {
    let n = report.rows.len();
    let values: BTreeSet<Dyadic> = report.rows.iter().map(|r| r.expected).collect();
    if report.all_equal() {
        out.line(format!("equal on all {n} corpus branches"));
    } else {
        out.line(format!(
            "{} equal, {} mismatch, {} inconclusive of {n} corpus branches",
            report.count(CheckStatus::Equal),
            report.count(CheckStatus::Mismatch),
            report.count(CheckStatus::Inconclusive)
        ));
    }
    let values: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    out.line(format!("values {{{}}}", values.join(", ")));
    report.all_equal()
}

pub fn cmd_construct(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let FunctionSpec::Pipeline(stages) = &cfg.function else {
        return Err(CliError::Usage("construct needs a pipeline function".into()));
    };
    let plan = plan(stages)?;
    let spec = &cfg.branches;
    let mut rng = Streams::new(cfg.seed).stream("branches");
    let (report, exported) = match &plan {
        Plan::Single { machine, check } => {
            let letters = machine.letters();
            let branches = sample_branches(&mut rng, spec.count, letters, spec.max_stem, spec.max_cycle);
            let fam = family_from_automaton(machine)?;
            if *check {
                let mut samples = Vec::new();
                for s in all_prefixes(letters, REGULARIZE_SAMPLE_DEPTH) {
                    for n in 0..REGULARIZE_SAMPLE_LEVELS {
                        samples.extend((0..letters).map(|a| (n, s.clone(), a)));
                    }
                }
                check_family_invariants(&fam, samples).map_err(CliError::Contract)?;
            }
            let cu = ConstructedU::new(discretize(fam));
            let report = limsup_core::verify_construction(&cu, machine, &branches)?;
            let min = minimize(&cu, machine, MINIMIZE_LOOKAHEAD, MINIMIZE_CHECK_DEPTH, MINIMIZE_MAX_STATES)?;
            (report, min)
        }
        Plan::Algebra { op, left, right } => {
            let letters = left.letters();
            let branches = sample_branches(&mut rng, spec.count, letters, spec.max_stem, spec.max_cycle);
            let cu = algebra(left, right, *op)?;
            let report = verify_algebra(&cu, left, right, *op, &branches)?;
            let min = minimize(&cu, left, MINIMIZE_LOOKAHEAD, MINIMIZE_CHECK_DEPTH, MINIMIZE_MAX_STATES)?;
            (report, min)
        }
    };
    let ok = summarize(&report, out);
    let dir = &cfg.output.dir;
    let stem = &cfg.output.stem;
    let io = |e: std::io::Error| CliError::Contract(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(dir.join(format!("{stem}.report.json")), body + "\n").map_err(io)?;
    match exported {
        Some(u) => {
            let path = dir.join(format!("{stem}.u.json"));
            let doc = serde_json::to_string_pretty(&AutomatonDoc::from(&u)).expect("machine serializes");
            std::fs::write(&path, doc + "\n").map_err(io)?;
            out.line(format!("automaton {} states -> {}", u.states(), path.display()));
        }
        None => out.line("automaton none (the constructed u is available only as an oracle)"),
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Failure("construction differs from the target on some corpus branches".into()))
    }
}

pub fn cmd_suite(seed: u64, out: &mut Output) -> Result<(), CliError> {
    let report = run_suite(&SuiteOptions::with_seed(seed));
    out.stdout.extend(report.to_string().lines().map(String::from));
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failure("some acceptance criteria failed".into()))
    }
}
