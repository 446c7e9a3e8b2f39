//! Fixtures shared by the benchmarks.

use limsup_core::corpus::{automaton_corpus, branch_corpus, random_fsm_i, Grid, Streams};
use limsup_core::strategies::FsmStrategyI;
use limsup_core::{EventuallyPeriodicBranch, NodeAutomaton};

pub const SEED: u64 = 0x5eed;

/// Random binary machines with at most `max_states` states.
pub fn machines(count: usize, max_states: usize) -> Vec<NodeAutomaton> {
    automaton_corpus(&mut Streams::new(SEED).stream("bench/machines"), count, max_states)
}

pub fn branches() -> Vec<EventuallyPeriodicBranch> {
    branch_corpus(2, 3, 3)
}

/// Three-state Player I machines reading values on the standard grid.
pub fn opponents(count: usize) -> Vec<FsmStrategyI> {
    let mut rng = Streams::new(SEED).stream("bench/opponents");
    let values = Grid::STANDARD.points();
    (0..count).map(|_| random_fsm_i(&mut rng, 3, 2, &values, false)).collect()
}
