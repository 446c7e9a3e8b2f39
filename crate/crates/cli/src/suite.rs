//! The acceptance suite: eight universally quantified checks over a
//! seed-derived corpus.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use limsup_core::algebra::{algebra, verify_algebra, AlgebraOp};
use limsup_core::corpus::{
    automaton_corpus, baire1_fixture, branch_corpus, random_fsm_i, random_fsm_ii, Grid, Streams,
};
use limsup_core::game::{play, Outcome, RunTrace};
use limsup_core::strategies::{
    check_eqn_ind, ConstantII, DyadicSpiral, EventuallyZeroIndicator, FsmStrategyI, MeagerDenseInstance,
    OscillationInstance, SPIRAL_CAP,
};
use limsup_core::{
    approx_copycat, construct_u, copycat_strategy, discretize, eventually_zero_instance, exact_run,
    family_from_automaton, indicator_oscillation_instance, lift_strategy, pair_strategies, play_until_lasso,
    rn_sup, rstar_sup, strategy_i_meager_dense, strategy_i_oscillation, strategy_ii_from_u, verify_construction,
    ConstructedU, Dyadic, FullTree, GameKind, IIMove, LetterClass, NodeAutomaton, Prefix,
    Result, StrategyI, Transition, ValueSet,
};

use crate::oracle::Scanner;

/// Round cap for runs expected to close into a lasso.
pub const LASSO_CAP: usize = 20_000;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Lets Player II in the first criterion play a machine whose outputs
    /// differ from the declared function on one transition.
    pub tamper: bool,
}

impl SuiteOptions {
    pub fn with_seed(seed: u64) -> SuiteOptions {
        SuiteOptions { seed, tamper: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub millis: u128,
    pub detail: String,
    pub counterexample: Option<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<24} checked={:<6} {:>7}ms  {}", self.name, self.checked, self.millis, self.detail)?;
        if let Some(cx) = &self.counterexample {
            write!(f, "\n     counterexample: {cx}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn pass_vector(&self) -> Vec<bool> {
        self.criteria.iter().map(|c| c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "acceptance suite, seed {}", self.seed)?;
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        write!(f, "{passed}/{} criteria passed", self.criteria.len())
    }
}

/// Running count of checks and failures inside one criterion.
pub struct Tally {
    checked: usize,
    failures: Vec<String>,
    detail: String,
    counterexample: Option<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { checked: 0, failures: Vec::new(), detail: String::new(), counterexample: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

type Body = fn(&SuiteOptions) -> Result<Tally>;

pub const CRITERIA: [(&str, Body); 8] = [
    ("1-from-u-soundness", from_u_soundness),
    ("2-construction", construction),
    ("3-algebra", algebra_ops),
    ("4-switching-dichotomy", switching),
    ("5-oscillation", oscillation),
    ("6-pair-strategies", pair_fixtures),
    ("7-lifting", lifting),
    ("8-copycat", copycat),
];

pub fn run_criterion(name: &'static str, body: Body, opts: &SuiteOptions) -> CriterionResult {
    let t0 = Instant::now();
    let res = body(opts);
    let millis = t0.elapsed().as_millis();
    match res {
        Ok(t) => {
            let passed = t.failures.is_empty() && t.checked > 0;
            let mut detail = t.detail;
            if !t.failures.is_empty() {
                let shown: Vec<&str> = t.failures.iter().take(3).map(String::as_str).collect();
                detail = format!("{detail}; {} failures, first: {}", t.failures.len(), shown.join(" | "));
            }
            CriterionResult { name, passed, checked: t.checked, millis, detail, counterexample: t.counterexample }
        }
        Err(e) => CriterionResult {
            name,
            passed: false,
            checked: 0,
            millis,
            detail: format!("error: {e}"),
            counterexample: None,
        },
    }
}

/// Runs every criterion, independent criteria in parallel; the report is
/// sorted by criterion name.
pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut criteria: Vec<CriterionResult> =
        CRITERIA.par_iter().map(|&(name, body)| run_criterion(name, body, opts)).collect();
    criteria.sort_by(|a, b| a.name.cmp(b.name));
    SuiteReport { seed: opts.seed, criteria }
}

fn sample_values(rng: &mut impl rand::Rng, k: usize) -> Vec<Dyadic> {
    let mut v: Vec<Dyadic> = (0..k).map(|_| Grid::STANDARD.sample(rng)).collect();
    v.sort();
    v.dedup();
    v
}

fn tampered(u: &NodeAutomaton) -> NodeAutomaton {
    let bump = Dyadic::new(1, 2);
    let ts: Vec<Transition> = u
        .transitions()
        .into_iter()
        .map(|t| {
            if t.from == u.initial() && t.class == LetterClass::Letter(1) {
                Transition { output: t.output + bump, ..t }
            } else {
                t
            }
        })
        .collect();
    NodeAutomaton::new(u.states(), u.initial(), u.letters(), &ts).expect("same shape")
}

fn render_trace(trace: &RunTrace) -> String {
    let lasso = trace.lasso.as_ref().map_or("none".to_string(), |l| format!("({}, {})", l.start, l.period));
    let shown = trace.lasso.as_ref().map_or(trace.rounds.len(), |l| l.start + l.period).min(24);
    let rounds: Vec<String> =
        trace.rounds[..shown].iter().map(|r| format!("{}:{}", r.letter, r.mv.v())).collect();
    format!("lasso {lasso}, rounds x:v = [{}]", rounds.join(" "))
}

/// Opponent index, rounds played, whether II won, and the trace.
type PlayedRun = (usize, usize, bool, RunTrace);

fn from_u_soundness(opts: &SuiteOptions) -> Result<Tally> {
    let streams = Streams::new(opts.seed);
    let machines = automaton_corpus(&mut streams.stream("corpus"), 100, 4);
    let mut rng = streams.stream("opponents");
    let opponents: Vec<FsmStrategyI> = (0..20)
        .map(|_| {
            let values = sample_values(&mut rng, 3);
            random_fsm_i(&mut rng, 3, 2, &values, false)
        })
        .collect();
    let rows: Vec<Result<Vec<PlayedRun>>> = machines
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let played = if opts.tamper { tampered(u) } else { u.clone() };
            opponents
                .iter()
                .enumerate()
                .map(|(j, opp)| {
                    let (trace, v) = exact_run(
                        &GameKind::Gamma,
                        &FullTree::BINARY,
                        &mut opp.reset(),
                        &mut strategy_ii_from_u(&played),
                        u,
                        LASSO_CAP,
                    )?;
                    Ok((i, j, v.outcome == Outcome::WinII && v.lasso.is_some(), trace))
                })
                .collect()
        })
        .collect();
    let mut t = Tally::new();
    let mut worst: Option<(usize, usize, RunTrace)> = None;
    for row in rows {
        for (i, j, ok, trace) in row? {
            t.check(ok, || format!("machine {i} vs opponent {j}"));
            if !ok && worst.as_ref().is_none_or(|w| trace.rounds.len() < w.2.rounds.len()) {
                worst = Some((i, j, trace));
            }
        }
    }
    t.detail = format!("{} machines x {} opponents", machines.len(), opponents.len());
    t.counterexample = worst.map(|(i, j, tr)| format!("machine {i} vs opponent {j}: {}", render_trace(&tr)));
    Ok(t)
}

fn all_prefixes(max_len: usize) -> Vec<Prefix> {
    let mut out = vec![Prefix::empty()];
    let mut frontier = vec![Prefix::empty()];
    for _ in 0..max_len {
        frontier = frontier.iter().flat_map(|p| [p.extend(0), p.extend(1)]).collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn construction(opts: &SuiteOptions) -> Result<Tally> {
    let machines = automaton_corpus(&mut Streams::new(opts.seed).stream("construction"), 50, 3);
    let branches = branch_corpus(2, 3, 3);
    let prefixes = all_prefixes(4);
    let rows: Vec<Result<(usize, usize, Vec<String>)>> = machines
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let fam = discretize(family_from_automaton(u)?);
            let cu = ConstructedU::new(fam);
            let report = verify_construction(&cu, u, &branches)?;
            let mut fails: Vec<String> = report
                .rows
                .iter()
                .filter(|r| r.status != limsup_core::construct::CheckStatus::Equal)
                .map(|r| format!("machine {i} branch {}: {:?}", r.branch, r.status))
                .collect();
            let scanner = Scanner::new(u);
            let fam = cu.family();
            for s in &prefixes {
                let levels = s.len() + 12;
                let scan = scanner.scan_prefix(s, levels);
                let rn: Vec<_> = (0..=levels).map(|n| rn_sup(fam, n, s)).collect();
                if rstar_sup(fam, s)? != scan.rstar || rn != scan.rn || construct_u(fam, s)? != scan.u {
                    fails.push(format!("machine {i} prefix {s}: scan disagrees"));
                }
            }
            Ok((report.rows.len(), prefixes.len(), fails))
        })
        .collect();
    let mut t = Tally::new();
    let (mut nb, mut np) = (0, 0);
    for row in rows {
        let (b, p, fails) = row?;
        nb += b;
        np += p;
        t.checked += b + p;
        t.failures.extend(fails);
    }
    t.detail = format!("{} machines: {nb} branch checks, {np} prefix scans", machines.len());
    Ok(t)
}

fn algebra_ops(opts: &SuiteOptions) -> Result<Tally> {
    let mut rng = Streams::new(opts.seed).stream("algebra");
    let pairs: Vec<(NodeAutomaton, NodeAutomaton)> =
        (0..50).map(|_| (automaton_corpus(&mut rng, 1, 3).remove(0), automaton_corpus(&mut rng, 1, 3).remove(0))).collect();
    let branches = branch_corpus(2, 3, 3);
    let rows: Vec<Result<(usize, Vec<String>)>> = pairs
        .par_iter()
        .enumerate()
        .flat_map(|(i, (u1, u2))| AlgebraOp::ALL.into_par_iter().map(move |op| (i, u1, u2, op)))
        .map(|(i, u1, u2, op)| {
            let cu = algebra(u1, u2, op)?;
            let report = verify_algebra(&cu, u1, u2, op, &branches)?;
            let fails = report
                .rows
                .iter()
                .filter(|r| r.status != limsup_core::construct::CheckStatus::Equal)
                .map(|r| format!("pair {i} {op} branch {}: {:?}", r.branch, r.status))
                .collect();
            Ok((report.rows.len(), fails))
        })
        .collect();
    let mut t = Tally::new();
    for row in rows {
        let (n, fails) = row?;
        t.checked += n;
        t.failures.extend(fails);
    }
    t.detail = format!("{} pairs x 3 ops x {} branches", pairs.len(), branches.len());
    Ok(t)
}

fn switching(opts: &SuiteOptions) -> Result<Tally> {
    let inst = Arc::new(eventually_zero_instance());
    let mut t = Tally::new();
    let threshold_value = Dyadic::new(29, 5);
    let threshold_m = (0u32..).find(|&m| Dyadic::ONE - Dyadic::new(1, m) >= threshold_value).expect("finite");

    let mut s = strategy_i_meager_dense(inst.clone());
    let trace = play(&GameKind::Gamma, &FullTree::BINARY, &mut s, &mut ConstantII(IIMove::Single(threshold_value)), 2000);
    t.check(trace.fault.is_none() && trace.rounds.len() == 2000, || "29/32 run did not reach the horizon".into());
    t.check(s.m() == threshold_m as usize, || format!("m froze at {}, threshold {threshold_m}", s.m()));
    t.check(s.switches().iter().all(|w| w.previous_m < threshold_m as usize), || "switch at or past the threshold".into());
    let target = s.stages().last().expect("stages").target.clone();
    let last = s.switches().last().map_or(0, |w| w.stage + 1);
    let letters = trace.letters();
    t.check((last..letters.len()).all(|k| letters[k] == target.letter_at(k)), || "tail leaves the final target".into());
    let fy = inst.f().eval_branch(&target)?;
    t.check(fy == Dyadic::ONE && fy != threshold_value, || format!("final target f = {fy}"));
    t.check(check_eqn_ind(&s).is_ok(), || "29/32 run breaks the target prefix identity".into());

    let run_one = |h: usize| {
        let mut s = strategy_i_meager_dense(inst.clone());
        play(&GameKind::Gamma, &FullTree::BINARY, &mut s, &mut ConstantII(IIMove::Single(Dyadic::ONE)), h);
        s
    };
    let (s1k, s2k) = (run_one(1000), run_one(2000));
    let (n1, n2) = (s1k.switches().len(), s2k.switches().len());
    t.check(n2 > n1 && n2 >= 5, || format!("switch counts {n1} at 1000, {n2} at 2000"));
    for s in [&s1k, &s2k] {
        let emitted = s.emitted();
        t.check((0..=s.m()).all(|m| inst.s_disjoint(emitted, m)), || "some reached m has no 1 beyond it".into());
        t.check(check_eqn_ind(s).is_ok(), || "constant-1 run breaks the target prefix identity".into());
    }

    let mut rng = Streams::new(opts.seed).stream("switching-opponents");
    let values = [Dyadic::ZERO, Dyadic::new(1, 1), Dyadic::new(3, 2), threshold_value, Dyadic::ONE];
    for k in 0..20 {
        let mut opp = random_fsm_ii(&mut rng, 3, 2, &values, false);
        let mut s = strategy_i_meager_dense(inst.clone());
        play(&GameKind::Gamma, &FullTree::BINARY, &mut s, &mut opp, 500);
        t.check(check_eqn_ind(&s).is_ok(), || format!("opponent {k} breaks the target prefix identity"));
    }
    t.detail = format!("threshold m = {threshold_m}; switches {n1} at 1000, {n2} at 2000; 20 corpus opponents");
    Ok(t)
}

fn oscillation(opts: &SuiteOptions) -> Result<Tally> {
    let inst = Arc::new(indicator_oscillation_instance());
    let eps = inst.epsilon();
    let mut t = Tally::new();

    let mut s = strategy_i_oscillation(inst.clone());
    play(&GameKind::GammaPrime, &FullTree::BINARY, &mut s, &mut ConstantII(IIMove::Pair(Dyadic::ONE, Dyadic::ZERO)), 2000);
    let chain = limsup_core::strategies::per_switch_inequality(s.triggers(), eps);
    t.check(!chain.is_empty(), || "no completed even phase".into());
    for (k, ok) in &chain {
        t.check(*ok, || format!("inequality fails at phase {k}"));
    }

    let half = Dyadic::new(1, 1);
    let mut s = strategy_i_oscillation(inst.clone());
    let (trace, v) = exact_run(
        &GameKind::GammaPrime,
        &FullTree::BINARY,
        &mut s,
        &mut ConstantII(IIMove::Pair(half, half)),
        &EventuallyZeroIndicator,
        LASSO_CAP,
    )?;
    t.check(trace.lasso.is_some() && v.outcome == Outcome::WinI, || format!("(1/2, 1/2) opponent: {:?}", v.outcome));

    let mut rng = Streams::new(opts.seed).stream("oscillation-opponents");
    let values = [Dyadic::ZERO, Dyadic::new(1, 2), half, Dyadic::new(3, 2), Dyadic::ONE];
    let (mut exact, mut undecided) = (0, 0);
    for k in 0..20 {
        let mut opp = random_fsm_ii(&mut rng, 2, 2, &values, true);
        let mut s = strategy_i_oscillation(inst.clone());
        let (_, v) =
            exact_run(&GameKind::GammaPrime, &FullTree::BINARY, &mut s, &mut opp, &EventuallyZeroIndicator, LASSO_CAP)?;
        match v.outcome {
            Outcome::WinI => exact += 1,
            Outcome::UndecidedAtHorizon(_) => {
                undecided += 1;
                let gap = v.diagnostics.as_ref().and_then(|d| d.min_gap);
                t.check(gap.is_some_and(|g| g >= eps), || format!("opponent {k}: undecided with tail gap {gap:?}"));
                continue;
            }
            Outcome::WinII => {}
        }
        t.check(v.outcome == Outcome::WinI, || format!("opponent {k}: {:?}", v.outcome));
    }
    t.detail = format!("{} completed even phases; corpus: {exact} exact WinI, {undecided} undecided", chain.len());
    Ok(t)
}

fn pair_fixtures(opts: &SuiteOptions) -> Result<Tally> {
    let streams = Streams::new(opts.seed);
    let mut rng = streams.stream("baire1");
    let fixtures: Vec<(NodeAutomaton, NodeAutomaton)> = (0..20).map(|_| baire1_fixture(&mut rng, 3)).collect();
    let mut rng = streams.stream("pair-opponents");
    let opponents: Vec<FsmStrategyI> = (0..20)
        .map(|_| {
            let values = sample_values(&mut rng, 2);
            random_fsm_i(&mut rng, 3, 2, &values, true)
        })
        .collect();
    let branches = branch_corpus(2, 3, 3);
    let mut t = Tally::new();
    for (i, (uf, ug)) in fixtures.iter().enumerate() {
        let certified = branches.iter().try_fold(true, |acc, x| -> Result<bool> {
            Ok(acc && limsup_core::eval_limsup(uf, x)? == -limsup_core::eval_limsup(ug, x)?)
        })?;
        t.check(certified, || format!("fixture {i} fails certification"));
        if !certified {
            continue;
        }
        for (j, opp) in opponents.iter().enumerate() {
            let mut ii = pair_strategies(strategy_ii_from_u(uf), strategy_ii_from_u(ug));
            let (_, v) = exact_run(&GameKind::GammaPrime, &FullTree::BINARY, &mut opp.reset(), &mut ii, uf, LASSO_CAP)?;
            t.check(v.outcome == Outcome::WinII && v.lasso.is_some(), || format!("fixture {i} vs opponent {j}: {:?}", v.outcome));
        }
    }
    t.detail = format!("{} certified fixtures x {} opponents", fixtures.len(), opponents.len());
    Ok(t)
}

fn lifting(opts: &SuiteOptions) -> Result<Tally> {
    let streams = Streams::new(opts.seed);
    let r_values = [Dyadic::ZERO, Dyadic::ONE];
    let r = ValueSet::finite(r_values);
    let mut rng = streams.stream("lifting");
    let strategies: Vec<FsmStrategyI> = (0..5).map(|_| random_fsm_i(&mut rng, 3, 2, &r_values, false)).collect();
    let mut rng = streams.stream("lifting-opponents");
    let opponents: Vec<_> = (0..20)
        .map(|k| {
            let mut values = sample_values(&mut rng, 3);
            // a third of the opponents can settle on a point of R
            if k % 3 == 0 {
                values.push(Dyadic::ONE);
            }
            random_fsm_ii(&mut rng, 3, 2, &values, false)
        })
        .collect();
    let mut t = Tally::new();
    let mut in_r = 0;
    for (i, s_r) in strategies.iter().enumerate() {
        for (j, opp) in opponents.iter().enumerate() {
            let mut lifted = lift_strategy(s_r.reset(), r.clone());
            let trace = play_until_lasso(&GameKind::Gamma, &FullTree::BINARY, &mut lifted, &mut opp.clone(), LASSO_CAP);
            let rounded: Vec<Dyadic> =
                trace.values().iter().map(|&v| lifted.round_value(v)).collect::<std::result::Result<_, _>>().map_err(
                    |e| limsup_core::Error::Oracle(e.0),
                )?;
            let mut replay = s_r.reset();
            let mut letters = vec![replay.next_letter(None).map_err(|e| limsup_core::Error::Oracle(e.0))?];
            for v in &rounded[..rounded.len() - 1] {
                letters.push(replay.next_letter(Some(&IIMove::Single(*v))).map_err(|e| limsup_core::Error::Oracle(e.0))?);
            }
            t.check(letters == trace.letters(), || format!("strategy {i} vs opponent {j}: replay diverges"));
            let Some(l) = &trace.lasso else {
                t.check(false, || format!("strategy {i} vs opponent {j}: no lasso"));
                continue;
            };
            let cyc = l.start..l.start + l.period;
            let lim_v = trace.values()[cyc.clone()].iter().copied().max().expect("cycle");
            let lim_f = rounded[cyc].iter().copied().max().expect("cycle");
            if r.contains(lim_v) {
                in_r += 1;
                t.check(lim_f == lim_v, || format!("strategy {i} vs opponent {j}: limsup F = {lim_f}, limsup v = {lim_v}"));
            }
        }
    }
    t.detail = format!("{} strategies x {} opponents, {in_r} runs with limsup v in R", strategies.len(), opponents.len());
    Ok(t)
}

fn copycat(opts: &SuiteOptions) -> Result<Tally> {
    let streams = Streams::new(opts.seed);
    let mut rng = streams.stream("copycat-opponents");
    let naturals: Vec<Dyadic> = (0..5).map(Dyadic::from_int).collect();
    let mut t = Tally::new();
    for k in 0..20 {
        let mut opp = random_fsm_ii(&mut rng, 3, 3, &naturals, false);
        let trace = play_until_lasso(&GameKind::Gamma, &FullTree::NATURALS, &mut copycat_strategy(), &mut opp, LASSO_CAP);
        let Some(l) = &trace.lasso else {
            t.check(false, || format!("copycat opponent {k}: no lasso"));
            continue;
        };
        let cyc = &trace.rounds[l.start..l.start + l.period];
        let max_x = cyc.iter().map(|r| r.letter).max().expect("cycle");
        let max_v = cyc.iter().map(|r| r.mv.v()).max().expect("cycle");
        t.check(Dyadic::from_int(max_x as i128) == max_v, || format!("copycat opponent {k}: {max_x} vs {max_v}"));
    }

    let q = Arc::new(DyadicSpiral::new(SPIRAL_CAP));
    let mut rng = streams.stream("approx-copycat-opponents");
    for k in 0..20 {
        let values = sample_values(&mut rng, 4);
        let mut opp = random_fsm_ii(&mut rng, 3, 3, &values, false);
        let trace = play(&GameKind::Gamma, &FullTree::NATURALS, &mut approx_copycat(q.clone()), &mut opp, 64);
        t.check(trace.fault.is_none(), || format!("approximate copycat opponent {k}: {:?}", trace.fault));
        for (n, w) in trace.rounds.windows(2).enumerate() {
            let qx = q.get(w[1].letter as usize).expect("index within the enumeration");
            let ok = (w[0].mv.v() - qx).abs().cmp_pow2_neg(n as u64).is_le();
            t.check(ok, || format!("approximate copycat opponent {k}, round {n}: |{} - {qx}| > 2^-{n}", w[0].mv.v()));
        }
    }
    t.detail = "20 natural-valued lassos, 20 approximate runs of 64 rounds".into();
    Ok(t)
}

/// Runs the single criterion called `name`.
pub fn run_named(name: &str, opts: &SuiteOptions) -> Option<CriterionResult> {
    CRITERIA.iter().find(|c| c.0 == name).map(|&(n, body)| run_criterion(n, body, opts))
}
