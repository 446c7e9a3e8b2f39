//! The games `Γ(f)`, `Γ'(f)` and `Γ_R(f)`: alternating play between a letter
//! player (I) and a value player (II), with exact verdicts for runs that
//! close into a lasso.

pub mod export;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::BranchFunction;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::tree::{EventuallyPeriodicBranch, Letter, Prefix, TreeSpec};

/// Hard cap on the number of rounds of any run.
pub const MAX_ROUNDS: usize = 1_000_000;

/// Extra periods played after a lasso is detected, so the certificate can be
/// replayed from the trace alone.
pub const CERTIFICATE_PERIODS: usize = 3;

/// A set of values Player II is restricted to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSet {
    Finite(BTreeSet<Dyadic>),
    /// All multiples of `2^-exponent`.
    Grid { exponent: u32 },
}

impl ValueSet {
    pub fn finite(values: impl IntoIterator<Item = Dyadic>) -> ValueSet {
        ValueSet::Finite(values.into_iter().collect())
    }

    pub fn contains(&self, y: Dyadic) -> bool {
        match self {
            ValueSet::Finite(set) => set.contains(&y),
            ValueSet::Grid { exponent } => y.exponent() <= *exponent,
        }
    }

    /// A nearest point of the set (the lower one on ties). Its distance to `y`
    /// is exactly `d(y, R)`, so it satisfies every bound of the form
    /// `|F(y) - y| < d(y, R) + ε` with `ε > 0`.
    pub fn near(&self, y: Dyadic) -> Option<Dyadic> {
        match self {
            ValueSet::Finite(set) => set.iter().copied().min_by_key(|&p| ((p - y).abs(), p)),
            ValueSet::Grid { exponent } => {
                let up = y.ceil_to_grid(*exponent);
                if up == y {
                    return Some(y);
                }
                let down = up - Dyadic::pow2_neg(*exponent)?;
                Some(if up - y < y - down { up } else { down })
            }
        }
    }

    /// `d(y, R)`; `None` for the empty set.
    pub fn distance(&self, y: Dyadic) -> Option<Dyadic> {
        self.near(y).map(|p| (p - y).abs())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Gamma,
    GammaPrime,
    GammaRestricted(ValueSet),
}

impl GameKind {
    pub fn pair_valued(&self) -> bool {
        matches!(self, GameKind::GammaPrime)
    }
}

/// A move of Player II: `v_t`, or `(v_t, w_t)` in `Γ'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IIMove {
    Single(Dyadic),
    Pair(Dyadic, Dyadic),
}

impl IIMove {
    pub fn v(&self) -> Dyadic {
        match *self {
            IIMove::Single(v) | IIMove::Pair(v, _) => v,
        }
    }

    pub fn w(&self) -> Option<Dyadic> {
        match *self {
            IIMove::Single(_) => None,
            IIMove::Pair(_, w) => Some(w),
        }
    }

    fn encode(mv: Option<&IIMove>, out: &mut Vec<i128>) {
        match mv {
            None => out.push(0),
            Some(IIMove::Single(v)) => out.extend([1, v.numerator(), v.exponent() as i128]),
            Some(IIMove::Pair(v, w)) => {
                out.extend([2, v.numerator(), v.exponent() as i128, w.numerator(), w.exponent() as i128])
            }
        }
    }
}

/// A strategy's self-declared state. Two rounds with equal finite descriptors
/// (and equal last II moves) must lead to identical futures.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StateDescriptor {
    Finite(Vec<i128>),
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyFault(pub String);

impl fmt::Display for StrategyFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Per-round counters a strategy may expose.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyReport {
    /// Number of retargetings so far.
    pub switches: u64,
    /// Distance of the last watched value from the current trigger target.
    pub gap: Option<Dyadic>,
}

pub trait StrategyI: Send {
    /// The next letter, given II's previous move (`None` in round 0).
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault>;

    fn descriptor(&self) -> StateDescriptor;

    fn report(&self) -> StrategyReport {
        StrategyReport::default()
    }
}

pub trait StrategyII: Send {
    fn respond(&mut self, letter: Letter) -> Result<IIMove, StrategyFault>;

    fn descriptor(&self) -> StateDescriptor;
}

impl<S: StrategyI + ?Sized> StrategyI for Box<S> {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        (**self).next_letter(prev)
    }
    fn descriptor(&self) -> StateDescriptor {
        (**self).descriptor()
    }
    fn report(&self) -> StrategyReport {
        (**self).report()
    }
}

impl<S: StrategyII + ?Sized> StrategyII for Box<S> {
    fn respond(&mut self, letter: Letter) -> Result<IIMove, StrategyFault> {
        (**self).respond(letter)
    }
    fn descriptor(&self) -> StateDescriptor {
        (**self).descriptor()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub player: Player,
    pub round: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub letter: Letter,
    pub mv: IIMove,
    pub report: StrategyReport,
}

impl Round {
    /// Same moves, ignoring the strategy counters.
    pub fn same_moves(&self, other: &Round) -> bool {
        self.letter == other.letter && self.mv == other.mv
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso {
    pub start: usize,
    pub period: usize,
    /// Joint state `(I, II, last II move)` seen at both `start` and `start + period`.
    pub certificate: Vec<i128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTrace {
    pub kind: GameKind,
    pub rounds: Vec<Round>,
    pub lasso: Option<Lasso>,
    pub fault: Option<Fault>,
}

impl RunTrace {
    pub fn letters(&self) -> Vec<Letter> {
        self.rounds.iter().map(|r| r.letter).collect()
    }

    pub fn values(&self) -> Vec<Dyadic> {
        self.rounds.iter().map(|r| r.mv.v()).collect()
    }

    /// The branch `x` produced by Player I, when the run is a lasso.
    pub fn branch(&self) -> Option<EventuallyPeriodicBranch> {
        let l = self.lasso.as_ref()?;
        let letters = self.letters();
        EventuallyPeriodicBranch::new(letters[..l.start].to_vec(), letters[l.start..l.start + l.period].to_vec()).ok()
    }
}

fn joint_key(di: &[i128], dii: &[i128], prev: Option<&IIMove>) -> Vec<i128> {
    let mut key = Vec::with_capacity(di.len() + dii.len() + 7);
    key.push(di.len() as i128);
    key.extend_from_slice(di);
    key.push(dii.len() as i128);
    key.extend_from_slice(dii);
    IIMove::encode(prev, &mut key);
    key
}

/// Smallest period dividing `period` and earliest start for which the
/// recorded rounds `start..start + period` still describe the same tail.
fn tighten(rounds: &[Round], start: usize, period: usize) -> (usize, usize) {
    let block = &rounds[start..start + period];
    let period = (1..=period)
        .find(|&p| period.is_multiple_of(p) && (p..period).all(|i| block[i].same_moves(&block[i - p])))
        .unwrap_or(period);
    let mut start = start;
    while start > 0 && rounds[start - 1].same_moves(&rounds[start - 1 + period]) {
        start -= 1;
    }
    (start, period)
}

fn run(
    kind: &GameKind,
    tree: &dyn TreeSpec,
    s1: &mut dyn StrategyI,
    s2: &mut dyn StrategyII,
    max_rounds: usize,
    stop_after_lasso: bool,
) -> RunTrace {
    let max_rounds = max_rounds.min(MAX_ROUNDS);
    let mut trace = RunTrace { kind: kind.clone(), rounds: Vec::new(), lasso: None, fault: None };
    let mut seen: HashMap<Vec<i128>, usize> = HashMap::new();
    let mut prefix = Prefix::empty();
    let mut prev: Option<IIMove> = None;
    let mut stop_at = max_rounds;
    let mut t = 0;
    while t < stop_at {
        if trace.lasso.is_none() {
            if let (StateDescriptor::Finite(a), StateDescriptor::Finite(b)) = (s1.descriptor(), s2.descriptor()) {
                let key = joint_key(&a, &b, prev.as_ref());
                if let Some(&start) = seen.get(&key) {
                    let period = t - start;
                    let (start, period) = tighten(&trace.rounds, start, period);
                    trace.lasso = Some(Lasso { start, period, certificate: key });
                    if stop_after_lasso {
                        stop_at = stop_at.min(t + CERTIFICATE_PERIODS * period);
                        if t >= stop_at {
                            break;
                        }
                    }
                } else {
                    seen.insert(key, t);
                }
            }
        }
        let fault = |player, message: String| Fault { player, round: t, message };
        let letter = match s1.next_letter(prev.as_ref()) {
            Ok(a) => a,
            Err(e) => {
                trace.fault = Some(fault(Player::I, e.0));
                break;
            }
        };
        if !tree.admits(&prefix, letter) {
            trace.fault = Some(fault(Player::I, format!("letter {letter} leaves the tree at [{prefix}]")));
            break;
        }
        prefix.push(letter);
        let report = s1.report();
        let mv = match s2.respond(letter) {
            Ok(mv) => mv,
            Err(e) => {
                trace.fault = Some(fault(Player::II, e.0));
                break;
            }
        };
        let illegal = match (kind, &mv) {
            (GameKind::GammaPrime, IIMove::Single(_)) => Some("a single value where a pair is required".to_string()),
            (GameKind::Gamma | GameKind::GammaRestricted(_), IIMove::Pair(..)) => {
                Some("a pair where a single value is required".to_string())
            }
            (GameKind::GammaRestricted(r), IIMove::Single(v)) if !r.contains(*v) => Some(format!("value {v} is not in R")),
            _ => None,
        };
        if let Some(msg) = illegal {
            trace.fault = Some(fault(Player::II, msg));
            break;
        }
        trace.rounds.push(Round { letter, mv, report });
        prev = Some(mv);
        t += 1;
    }
    trace
}

/// Plays `horizon` rounds and records the first repetition of the joint state.
pub fn play(
    kind: &GameKind,
    tree: &dyn TreeSpec,
    s1: &mut dyn StrategyI,
    s2: &mut dyn StrategyII,
    horizon: usize,
) -> RunTrace {
    run(kind, tree, s1, s2, horizon.max(1), false)
}

/// Plays until the joint state repeats (then [`CERTIFICATE_PERIODS`] more
/// periods) or `cap` rounds have been played.
pub fn play_until_lasso(
    kind: &GameKind,
    tree: &dyn TreeSpec,
    s1: &mut dyn StrategyI,
    s2: &mut dyn StrategyII,
    cap: usize,
) -> RunTrace {
    run(kind, tree, s1, s2, cap.max(1), true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    #[serde(rename = "win_ii")]
    WinII,
    WinI,
    UndecidedAtHorizon(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub f: Dyadic,
    pub limsup_v: Dyadic,
    pub liminf_w: Option<Dyadic>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub window_start: usize,
    pub window_len: usize,
    pub max_v: Option<Dyadic>,
    pub min_v: Option<Dyadic>,
    pub max_w: Option<Dyadic>,
    pub min_w: Option<Dyadic>,
    pub switches: u64,
    pub switches_in_window: u64,
    /// Least trigger gap over the window, for strategies that report one.
    pub min_gap: Option<Dyadic>,
    pub reason: String,
}

impl Diagnostics {
    pub fn of(trace: &RunTrace, reason: impl Into<String>) -> Diagnostics {
        let window_start = trace.rounds.len() / 2;
        let w = &trace.rounds[window_start..];
        let vs = || w.iter().map(|r| r.mv.v());
        let ws = || w.iter().filter_map(|r| r.mv.w());
        let first = w.first().map_or(0, |r| r.report.switches);
        let last = w.last().map_or(0, |r| r.report.switches);
        Diagnostics {
            window_start,
            window_len: w.len(),
            max_v: vs().max(),
            min_v: vs().min(),
            max_w: ws().max(),
            min_w: ws().min(),
            switches: last,
            switches_in_window: last - first,
            min_gap: w.iter().filter_map(|r| r.report.gap).min(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub lasso: Option<(usize, usize)>,
    pub diagnostics: Option<Diagnostics>,
    pub fault: Option<Fault>,
}

impl Verdict {
    pub fn is_exact(&self) -> bool {
        self.witness.is_some()
    }
}

fn judge_fault(fault: &Fault) -> Verdict {
    let outcome = match fault.player {
        Player::I => Outcome::WinII,
        Player::II => Outcome::WinI,
    };
    Verdict { outcome, witness: None, lasso: None, diagnostics: None, fault: Some(fault.clone()) }
}

/// Recomputes the verdict of a lasso-certified trace: replays the cycle over
/// every later round in the trace, then evaluates the win condition.
pub fn check_win(trace: &RunTrace, f: &dyn BranchFunction, kind: &GameKind) -> Result<Verdict> {
    if let Some(fault) = &trace.fault {
        return Ok(judge_fault(fault));
    }
    let lasso = trace.lasso.as_ref().ok_or_else(|| Error::Certificate("trace has no lasso".into()))?;
    let (start, period) = (lasso.start, lasso.period);
    if period == 0 || trace.rounds.len() < start + 2 * period {
        return Err(Error::Certificate(format!(
            "trace of {} rounds is too short to replay lasso ({start}, {period})",
            trace.rounds.len()
        )));
    }
    for i in start..trace.rounds.len() - period {
        if !trace.rounds[i].same_moves(&trace.rounds[i + period]) {
            return Err(Error::Certificate(format!("round {} differs from round {i}", i + period)));
        }
    }
    let x = trace.branch().expect("lasso within trace");
    let cycle = &trace.rounds[start..start + period];
    let fx = f.eval_branch(&x)?;
    let limsup_v = cycle.iter().map(|r| r.mv.v()).max().expect("nonempty cycle");
    let liminf_w = match kind {
        GameKind::GammaPrime => Some(
            cycle
                .iter()
                .map(|r| r.mv.w().ok_or_else(|| Error::Certificate("single value in a pair game".into())))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .expect("nonempty cycle"),
        ),
        _ => None,
    };
    let win_ii = fx == limsup_v && liminf_w.is_none_or(|w| w == fx);
    Ok(Verdict {
        outcome: if win_ii { Outcome::WinII } else { Outcome::WinI },
        witness: Some(Witness { f: fx, limsup_v, liminf_w }),
        lasso: Some((start, period)),
        diagnostics: None,
        fault: None,
    })
}

/// Verdict of a finished (possibly lasso-free) run.
pub fn judge(trace: &RunTrace, f: &dyn BranchFunction, undecided_reason: &str) -> Result<Verdict> {
    if trace.fault.is_some() || trace.lasso.is_some() {
        return check_win(trace, f, &trace.kind);
    }
    Ok(Verdict {
        outcome: Outcome::UndecidedAtHorizon(trace.rounds.len()),
        witness: None,
        lasso: None,
        diagnostics: Some(Diagnostics::of(trace, undecided_reason)),
        fault: None,
    })
}

/// Plays to a lasso (or `cap`) and judges the run.
pub fn exact_run(
    kind: &GameKind,
    tree: &dyn TreeSpec,
    s1: &mut dyn StrategyI,
    s2: &mut dyn StrategyII,
    f: &dyn BranchFunction,
    cap: usize,
) -> Result<(RunTrace, Verdict)> {
    let trace = play_until_lasso(kind, tree, s1, s2, cap);
    let reason = match (s1.descriptor(), s2.descriptor()) {
        (StateDescriptor::Unbounded, _) => "Player I declares unbounded state",
        (_, StateDescriptor::Unbounded) => "Player II declares unbounded state",
        _ => "no repetition of the joint state within the cap",
    };
    let verdict = judge(&trace, f, reason)?;
    Ok((trace, verdict))
}

pub fn exact_verdict(
    kind: &GameKind,
    tree: &dyn TreeSpec,
    s1: &mut dyn StrategyI,
    s2: &mut dyn StrategyII,
    f: &dyn BranchFunction,
    cap: usize,
) -> Result<Verdict> {
    exact_run(kind, tree, s1, s2, f, cap).map(|(_, v)| v)
}
