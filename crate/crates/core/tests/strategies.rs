mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;

use limsup_core::corpus::{baire1_fixture, random_automaton, random_fsm_i, random_fsm_ii, Grid, Streams};
use limsup_core::strategies::{
    check_eqn_ind, per_switch_inequality, ConstantII, DyadicSpiral, MeagerDenseInstance, OrderMap,
};
use limsup_core::{
    approx_copycat, copycat_strategy, eventually_zero_instance, exact_run, indicator_oscillation_instance, lift_strategy,
    pair_strategies, play, relabel_strategy, strategy_i_meager_dense, strategy_i_oscillation, strategy_ii_from_u,
    u_from_strategy_ii, Dyadic, FullTree, GameKind, IIMove, NodeAutomaton, NodeFunction, Outcome, Prefix, StrategyI,
    ValueSet,
};

/// A strategy for Player II that maps every value of `inner` through `i`.
struct Mapped<S> {
    inner: S,
    map: OrderMap,
}

impl<S: limsup_core::StrategyII> limsup_core::StrategyII for Mapped<S> {
    fn respond(&mut self, letter: u64) -> Result<IIMove, limsup_core::StrategyFault> {
        let v = self.inner.respond(letter)?.v();
        Ok(IIMove::Single(self.map.forward(v).unwrap()))
    }
    fn descriptor(&self) -> limsup_core::StateDescriptor {
        self.inner.descriptor()
    }
}

#[test]
fn relabeled_strategy_replays_the_original_run() {
    let domain = [d(-1, 0), d(0, 0), d(1, 1), d(1, 0)];
    let map = OrderMap::from_fn(domain, |v| v + v + d(3, 2)).unwrap();
    let mut rng = Streams::new(41).stream("strategies");
    for _ in 0..100 {
        let s0 = random_fsm_i(&mut rng, 3, 2, &domain, false);
        let s2 = random_fsm_ii(&mut rng, 3, 2, &domain, false);
        let original = play(&GameKind::Gamma, &FullTree::BINARY, &mut s0.reset(), &mut s2.reset(), 60);
        let mut relabeled = relabel_strategy(s0.reset(), map.clone());
        let mut image = Mapped { inner: s2.reset(), map: map.clone() };
        let moved = play(&GameKind::Gamma, &FullTree::BINARY, &mut relabeled, &mut image, 60);
        assert_eq!(original.letters(), moved.letters());
        let back: Vec<Dyadic> = moved.values().into_iter().map(|y| map.inverse(y).unwrap()).collect();
        assert_eq!(original.values(), back);
    }
}

#[test]
fn lifted_strategy_plays_as_in_the_restricted_game() {
    let r = ValueSet::finite([Dyadic::ZERO, Dyadic::ONE]);
    let lifted = lift_strategy(copycat_strategy(), r.clone());
    assert_eq!(lifted.round_value(d(3, 2)).unwrap(), Dyadic::ONE);
    assert_eq!(lifted.round_value(d(1, 2)).unwrap(), Dyadic::ZERO);

    let mut rng = Streams::new(42).stream("strategies");
    let values = Grid::STANDARD.points();
    let restricted = GameKind::GammaRestricted(r.clone());
    let mut wins = 0;
    for _ in 0..100 {
        let raw = random_automaton(&mut rng, 3, 2, Grid::STANDARD);
        let u = NodeAutomaton::from_fn(raw.states(), 2, |q, a| {
            let (r, out) = raw.step(q, a).unwrap();
            (r, if out > Dyadic::ZERO { Dyadic::ONE } else { Dyadic::ZERO })
        })
        .unwrap();
        let s_r = random_fsm_i(&mut rng, 3, 2, &[Dyadic::ZERO, Dyadic::ONE], false);
        let s2 = random_fsm_ii(&mut rng, 3, 2, &values, false);
        let mut lifted = lift_strategy(s_r.reset(), r.clone());
        let (lifted_trace, verdict) = exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut lifted, &mut s2.reset(), &u, 10_000).unwrap();
        let mut replay = s_r.reset();
        let mut rounder = Rounded { inner: s2.reset(), r: r.clone() };
        let (r_trace, r_verdict) = exact_run(&restricted, &FullTree::BINARY, &mut replay, &mut rounder, &u, 10_000).unwrap();
        let n = lifted_trace.rounds.len().min(r_trace.rounds.len());
        assert_eq!(lifted_trace.letters()[..n], r_trace.letters()[..n]);
        if verdict.outcome == Outcome::WinII {
            wins += 1;
            assert_eq!(r_verdict.outcome, Outcome::WinII);
        }
    }
    assert!(wins > 0);
}

/// II's moves rounded to the nearest point of `r`.
struct Rounded<S> {
    inner: S,
    r: ValueSet,
}

impl<S: limsup_core::StrategyII> limsup_core::StrategyII for Rounded<S> {
    fn respond(&mut self, letter: u64) -> Result<IIMove, limsup_core::StrategyFault> {
        let v = self.inner.respond(letter)?.v();
        Ok(IIMove::Single(self.r.near(v).unwrap()))
    }
    fn descriptor(&self) -> limsup_core::StateDescriptor {
        self.inner.descriptor()
    }
}

#[test]
fn strategy_function_round_trips_the_machine() {
    let mut rng = Streams::new(43).stream("strategies");
    for _ in 0..30 {
        let u = random_automaton(&mut rng, 4, 2, Grid::STANDARD);
        let uf = u_from_strategy_ii(|| strategy_ii_from_u(&u));
        for s in prefixes_upto(2, 6).into_iter().filter(|s| !s.is_empty()) {
            let want = outputs_from(&u, u.initial(), &branch(s.letters(), &[0]), s.len()).pop().unwrap();
            assert_eq!(uf.value(&s).unwrap(), want, "{s:?}");
        }
    }
    assert!(u_from_strategy_ii(|| strategy_ii_from_u(&NodeAutomaton::letter_output(2))).value(&Prefix::empty()).is_err());
}

#[test]
fn spiral_search_matches_a_linear_scan() {
    let q = DyadicSpiral::new(4096);
    assert_eq!(q.get(0), Some(Dyadic::ZERO));
    for z in -24..=24 {
        for e in 0..4 {
            let v = d(z, e);
            for n in 0..6u64 {
                let tol = d(1, n as u32);
                let want = (0..q.len()).find(|&i| (v - q.get(i).unwrap()).abs() <= tol);
                assert_eq!(q.least_within(v, n), want, "{v} within 2^-{n}");
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for i in 0..q.len() {
        assert!(seen.insert(q.get(i).unwrap()), "duplicate at {i}");
    }
}

#[test]
fn copycat_letters_repeat_the_values() {
    let values: Vec<Dyadic> = (0..4).map(Dyadic::from_int).collect();
    let mut rng = Streams::new(44).stream("strategies");
    for _ in 0..50 {
        let s2 = random_fsm_ii(&mut rng, 3, 4, &values, false);
        let trace = limsup_core::play_until_lasso(&GameKind::Gamma, &FullTree::NATURALS, &mut copycat_strategy(), &mut s2.reset(), 5000);
        let (letters, vs) = (trace.letters(), trace.values());
        for t in 1..letters.len() {
            assert_eq!(Dyadic::from_int(letters[t] as i128), vs[t - 1]);
        }
        let lasso = trace.lasso.unwrap();
        let cycle = lasso.start + 1..lasso.start + 1 + lasso.period;
        let top_letter = letters[cycle.clone()].iter().max().unwrap();
        let top_value = vs[cycle.start - 1..cycle.end - 1].iter().max().unwrap();
        assert_eq!(Dyadic::from_int(*top_letter as i128), *top_value);
    }
}

#[test]
fn approx_copycat_tracks_values() {
    let spiral = Arc::new(DyadicSpiral::new(1 << 14));
    let values = Grid::STANDARD.points();
    let mut rng = Streams::new(45).stream("strategies");
    for _ in 0..20 {
        let s2 = random_fsm_ii(&mut rng, 3, 2, &values, false);
        let mut s1 = approx_copycat(spiral.clone());
        let trace = play(&GameKind::Gamma, &FullTree::NATURALS, &mut s1, &mut s2.reset(), 40);
        assert!(trace.fault.is_none());
        let (letters, vs) = (trace.letters(), trace.values());
        for t in 1..letters.len() {
            let q = spiral.get(letters[t] as usize).unwrap();
            assert!((q - vs[t - 1]).abs() <= d(1, (t - 1) as u32));
        }
    }
    let half = d(1, 1);
    let exact = (0..spiral.len()).find(|&i| spiral.get(i) == Some(half)).unwrap() as u64;
    let mut s1 = approx_copycat(spiral.clone());
    let trace = play(&GameKind::Gamma, &FullTree::NATURALS, &mut s1, &mut ConstantII(IIMove::Single(half)), 40);
    assert!(trace.letters()[30..].iter().all(|&a| a == exact));
    assert_eq!(s1.descriptor(), limsup_core::StateDescriptor::Unbounded);
}

fn meager_run(v: Dyadic, horizon: usize) -> limsup_core::strategies::SwitchingStrategy {
    let mut s = strategy_i_meager_dense(Arc::new(eventually_zero_instance()));
    let trace = play(&GameKind::Gamma, &FullTree::BINARY, &mut s, &mut ConstantII(IIMove::Single(v)), horizon);
    assert!(trace.fault.is_none());
    check_eqn_ind(&s).unwrap();
    s
}

#[test]
fn meager_switches_stop_below_the_level() {
    let v = d(29, 5);
    let s = meager_run(v, 2000);
    let expected: Vec<usize> = (0..20).take_while(|&m| v > Dyadic::ONE - d(1, m as u32)).collect();
    let got: Vec<usize> = s.switches().iter().map(|l| l.previous_m).collect();
    assert_eq!(got, expected);
    assert_eq!(s.m(), expected.len());

    let mut s1 = strategy_i_meager_dense(Arc::new(eventually_zero_instance()));
    let inst = eventually_zero_instance();
    let (_, verdict) =
        exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut s1, &mut ConstantII(IIMove::Single(v)), inst.f(), 100_000).unwrap();
    assert_eq!(verdict.outcome, Outcome::WinI);
}

#[test]
fn meager_switches_keep_coming_at_the_level() {
    let short = meager_run(Dyadic::ONE, 1000);
    let long = meager_run(Dyadic::ONE, 2000);
    assert!(long.switches().len() > short.switches().len());
    for log in long.switches() {
        assert!(log.prefix.letters().iter().enumerate().any(|(depth, &a)| depth > log.previous_m && a == 1));
    }
}

#[test]
fn meager_against_finite_opponents_wins_for_player_one() {
    let inst = eventually_zero_instance();
    let values = [Dyadic::ZERO, d(1, 1), d(29, 5)];
    let mut rng = Streams::new(46).stream("strategies");
    let mut exact = 0;
    for _ in 0..60 {
        let s2 = random_fsm_ii(&mut rng, 3, 2, &values, false);
        let mut s1 = strategy_i_meager_dense(Arc::new(eventually_zero_instance()));
        let (_, verdict) = exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut s1, &mut s2.reset(), inst.f(), 20_000).unwrap();
        if verdict.is_exact() {
            exact += 1;
            assert_eq!(verdict.outcome, Outcome::WinI);
        }
        check_eqn_ind(&s1).unwrap();
    }
    assert!(exact > 0);
}

#[test]
fn oscillation_triggers_keep_their_gap() {
    let inst = indicator_oscillation_instance();
    let eps = limsup_core::strategies::OscillationInstance::epsilon(&inst);
    let f = limsup_core::strategies::OscillationInstance::f(&inst);
    let values = [Dyadic::ZERO, d(1, 2), d(1, 1), Dyadic::ONE];
    let mut rng = Streams::new(47).stream("strategies");
    let mut checked = 0;
    for _ in 0..100 {
        let s2 = random_fsm_ii(&mut rng, 3, 2, &values, true);
        let mut s1 = strategy_i_oscillation(Arc::new(inst));
        let (trace, verdict) = exact_run(&GameKind::GammaPrime, &FullTree::BINARY, &mut s1, &mut s2.reset(), f, 20_000).unwrap();
        assert!(trace.fault.is_none());
        for (phase, holds) in per_switch_inequality(s1.triggers(), eps) {
            assert!(holds, "phase {phase}");
            checked += 1;
        }
        if verdict.is_exact() {
            assert_eq!(verdict.outcome, Outcome::WinI);
        }
    }
    assert!(checked > 0);
}

#[test]
fn paired_baire_one_strategies_win() {
    let mut rng = Streams::new(48).stream("strategies");
    let values = Grid::STANDARD.points();
    for _ in 0..40 {
        let (uf, uneg) = baire1_fixture(&mut rng, 4);
        for _ in 0..5 {
            let s1 = random_fsm_i(&mut rng, 3, 2, &values, true);
            let mut s2 = pair_strategies(strategy_ii_from_u(&uf), strategy_ii_from_u(&uneg));
            let (trace, verdict) = exact_run(&GameKind::GammaPrime, &FullTree::BINARY, &mut s1.reset(), &mut s2, &uf, 10_000).unwrap();
            assert_eq!(verdict.outcome, Outcome::WinII);
            let x = trace.branch().unwrap();
            assert_eq!(limsup(&uf, &x), liminf(&uf, &x));
            let w = verdict.witness.unwrap();
            assert_eq!(w.liminf_w, Some(w.limsup_v));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn avoiding_the_closed_set_is_monotone(v in prop::collection::vec(0u64..2, 0..16), a in 0u64..2, m in 0usize..18) {
        let inst = eventually_zero_instance();
        let s = Prefix::new(v);
        if inst.s_disjoint(&s, m) {
            prop_assert!(inst.s_disjoint(&s.extend(a), m));
            if m > 0 {
                prop_assert!(inst.s_disjoint(&s, m - 1));
            }
        }
        let y = inst.pick_y(&s, m).unwrap();
        let deep = y.initial_segment(s.len() + m + 4);
        prop_assert!(s.is_prefix_of(&deep));
        prop_assert!(inst.s_disjoint(&deep, m));
        prop_assert_eq!(inst.f().eval_branch(&y).unwrap(), Dyadic::ONE);
    }
}
