mod common;

use common::*;

use limsup_core::corpus::{random_automaton, random_fsm_i, random_fsm_i_exact, random_fsm_ii, Grid, Streams};
use limsup_core::game::{check_win, judge, Diagnostics, Player};
use limsup_core::strategies::{ConstantI, FsmStrategyI, FsmStrategyII};
use limsup_core::{
    copycat_strategy, exact_run, play, play_until_lasso, strategy_ii_from_u, Dyadic, FullTree, GameKind, IIMove, NodeAutomaton,
    Outcome, RunTrace, StrategyI, StrategyII,
};

/// II answers 0, 1, 0, 1, .. whatever I plays.
fn alternating() -> FsmStrategyII {
    let (zero, one) = (IIMove::Single(Dyadic::ZERO), IIMove::Single(Dyadic::ONE));
    FsmStrategyII::new(0, vec![vec![(1, zero)], vec![(0, one)]], 0).unwrap()
}

#[test]
fn copycat_against_alternating_values() {
    let trace = play_until_lasso(&GameKind::Gamma, &FullTree::NATURALS, &mut copycat_strategy(), &mut alternating(), 200);
    assert_eq!(&trace.letters()[..5], &[0, 0, 1, 0, 1]);
    let lasso = trace.lasso.as_ref().unwrap();
    assert_eq!(lasso.period, 2);
    assert!(lasso.start <= 1);
    assert!(trace.fault.is_none());
}

/// Replays fresh copies for `start + 6·period` rounds and checks that the run
/// really repeats with the claimed period.
fn replay(kind: &GameKind, tree: &FullTree, mut s1: impl StrategyI, mut s2: impl StrategyII, start: usize, period: usize) -> RunTrace {
    let trace = play(kind, tree, &mut s1, &mut s2, start + 6 * period);
    assert!(trace.fault.is_none());
    for t in start..trace.rounds.len() - period {
        assert!(trace.rounds[t].same_moves(&trace.rounds[t + period]), "round {t} vs {}", t + period);
    }
    trace
}

/// Independent verdict of a replayed lasso run.
fn brute_outcome(u: &NodeAutomaton, trace: &RunTrace, start: usize, period: usize, pairs: bool) -> (Outcome, Dyadic, Dyadic) {
    let letters = trace.letters();
    let x = branch(&letters[..start], &letters[start..start + period]);
    let f = limsup(u, &x);
    let tail = &trace.rounds[start + 5 * period..];
    let top = tail.iter().map(|r| r.mv.v()).max().unwrap();
    let low_w = tail.iter().filter_map(|r| r.mv.w()).min();
    let win = f == top && (!pairs || low_w == Some(f));
    (if win { Outcome::WinII } else { Outcome::WinI }, f, top)
}

#[test]
fn from_u_beats_random_three_state_opponents() {
    let u = NodeAutomaton::letter_output(2);
    let values = [Dyadic::ZERO, Dyadic::ONE];
    let mut rng = Streams::new(31).stream("games");
    for _ in 0..50 {
        let s1 = random_fsm_i_exact(&mut rng, 3, 2, &values, false);
        let (trace, verdict) =
            exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut s1.reset(), &mut strategy_ii_from_u(&u), &u, 10_000).unwrap();
        assert_eq!(verdict.outcome, Outcome::WinII);
        let x = trace.branch().unwrap();
        assert_eq!(verdict.witness.unwrap().f, limsup(&u, &x));
    }
}

#[test]
fn verdicts_match_replay_on_random_triples() {
    let mut rng = Streams::new(32).stream("games");
    let grid = Grid::STANDARD.points();
    let mut seen = [0usize; 2];
    for i in 0..500 {
        let pairs = i % 4 == 3;
        let kind = if pairs { GameKind::GammaPrime } else { GameKind::Gamma };
        let u = random_automaton(&mut rng, 3, 2, Grid::STANDARD);
        let values: Vec<Dyadic> = (0..3).map(|_| grid[rand::Rng::gen_range(&mut rng, 0..grid.len())]).collect();
        let s1 = random_fsm_i(&mut rng, 3, 2, &values, pairs);
        let s2 = random_fsm_ii(&mut rng, 3, 2, &values, pairs);
        let (trace, verdict) = exact_run(&kind, &FullTree::BINARY, &mut s1.reset(), &mut s2.reset(), &u, 10_000).unwrap();
        assert_eq!(check_win(&trace, &u, &kind).unwrap(), verdict);
        let (start, period) = verdict.lasso.unwrap();
        let fresh = replay(&kind, &FullTree::BINARY, s1.reset(), s2.reset(), start, period);
        let (outcome, f, top) = brute_outcome(&u, &fresh, start, period, pairs);
        assert_eq!(verdict.outcome, outcome, "triple {i}");
        let w = verdict.witness.unwrap();
        assert_eq!((w.f, w.limsup_v), (f, top));
        seen[(outcome == Outcome::WinII) as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn tail_window_of_a_long_play_sees_the_limsup() {
    let mut rng = Streams::new(33).stream("games");
    let values = Grid::STANDARD.points();
    for _ in 0..100 {
        let u = random_automaton(&mut rng, 3, 2, Grid::STANDARD);
        let s1 = random_fsm_i(&mut rng, 3, 2, &values, false);
        let (_, verdict) = exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut s1.reset(), &mut strategy_ii_from_u(&u), &u, 10_000).unwrap();
        let (start, period) = verdict.lasso.unwrap();
        let horizon = 2 * (start + period) + 2;
        let long = play(&GameKind::Gamma, &FullTree::BINARY, &mut s1.reset(), &mut strategy_ii_from_u(&u), horizon);
        assert_eq!(Diagnostics::of(&long, "").max_v, Some(verdict.witness.unwrap().limsup_v));
    }
}

#[test]
fn letters_stay_in_an_arity_three_tree() {
    let tree = FullTree::with_arity(3);
    let mut rng = Streams::new(34).stream("games");
    let values = [Dyadic::ZERO, Dyadic::ONE, Dyadic::from_int(2)];
    for _ in 0..50 {
        let u = random_automaton(&mut rng, 3, 3, Grid::STANDARD);
        let mut s1 = random_fsm_i(&mut rng, 4, 3, &values, false);
        let trace = play(&GameKind::Gamma, &tree, &mut s1, &mut strategy_ii_from_u(&u), 300);
        assert!(trace.fault.is_none());
        assert!(trace.letters().iter().all(|&a| a < 3));
    }
    let u = NodeAutomaton::letter_output(3);
    let trace = play(&GameKind::Gamma, &tree, &mut ConstantI(3), &mut strategy_ii_from_u(&u), 10);
    let fault = trace.fault.clone().unwrap();
    assert_eq!((fault.player, fault.round), (Player::I, 0));
    assert_eq!(judge(&trace, &u, "").unwrap().outcome, Outcome::WinII);
}

#[test]
fn runs_are_deterministic() {
    let mut rng = Streams::new(35).stream("games");
    let values = Grid::STANDARD.points();
    for _ in 0..30 {
        let u = random_automaton(&mut rng, 3, 2, Grid::STANDARD);
        let s1: FsmStrategyI = random_fsm_i(&mut rng, 3, 2, &values, false);
        let s2 = random_fsm_ii(&mut rng, 3, 2, &values, false);
        let a = exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut s1.reset(), &mut s2.reset(), &u, 5000).unwrap();
        let b = exact_run(&GameKind::Gamma, &FullTree::BINARY, &mut s1.reset(), &mut s2.reset(), &u, 5000).unwrap();
        assert_eq!(a, b);
    }
}
