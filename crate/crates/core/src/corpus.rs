//! Seeded generators for machines, opponents and branches.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automaton::{NodeAutomaton, StateId};
use crate::dyadic::Dyadic;
use crate::game::IIMove;
use crate::strategies::{FsmStrategyI, FsmStrategyII};
use crate::tree::{EventuallyPeriodicBranch, Letter};

/// Splits one seed into independent named streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Streams {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(name.as_bytes()));
        rng
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Output grid: multiples of `2^-exponent` in `[-bound, bound]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub exponent: u32,
    pub bound: i128,
}

impl Grid {
    /// `2^-3` steps in `[-2, 2]`.
    pub const STANDARD: Grid = Grid { exponent: 3, bound: 2 };

    pub fn points(&self) -> Vec<Dyadic> {
        let k = self.bound << self.exponent;
        (-k..=k).map(|z| Dyadic::new(z, self.exponent)).collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Dyadic {
        let k = self.bound << self.exponent;
        Dyadic::new(rng.gen_range(-k..=k), self.exponent)
    }
}

/// A machine with `1..=max_states` states over `letters` letters and outputs on `grid`.
pub fn random_automaton(rng: &mut impl Rng, max_states: usize, letters: u64, grid: Grid) -> NodeAutomaton {
    let states = rng.gen_range(1..=max_states);
    let cells: Vec<(StateId, Dyadic)> =
        (0..states * letters as usize).map(|_| (rng.gen_range(0..states), grid.sample(rng))).collect();
    NodeAutomaton::from_fn(states, letters, |q, a| cells[q * letters as usize + a as usize]).expect("total table")
}

pub fn automaton_corpus(rng: &mut impl Rng, count: usize, max_states: usize) -> Vec<NodeAutomaton> {
    (0..count).map(|_| random_automaton(rng, max_states, 2, Grid::STANDARD)).collect()
}

/// Player I Moore machine with `1..=max_states` states emitting letters below
/// `letters`, reading II's moves through `values`.
pub fn random_fsm_i(rng: &mut impl Rng, max_states: usize, letters: u64, values: &[Dyadic], pairs: bool) -> FsmStrategyI {
    let states = rng.gen_range(1..=max_states);
    random_fsm_i_exact(rng, states, letters, values, pairs)
}

/// As [`random_fsm_i`] with exactly `states` states.
pub fn random_fsm_i_exact(rng: &mut impl Rng, states: usize, letters: u64, values: &[Dyadic], pairs: bool) -> FsmStrategyI {
    let classes = FsmStrategyI::class_count_for(values.len(), pairs);
    let outputs = (0..states).map(|_| rng.gen_range(0..letters)).collect();
    let table = (0..states).map(|_| (0..classes).map(|_| rng.gen_range(0..states)).collect()).collect();
    FsmStrategyI::new(values.to_vec(), pairs, outputs, table, 0).expect("well-formed machine")
}

/// Player II Mealy machine with `1..=max_states` states emitting moves from
/// `values` (pairs when `pairs`).
pub fn random_fsm_ii(rng: &mut impl Rng, max_states: usize, letters: u64, values: &[Dyadic], pairs: bool) -> FsmStrategyII {
    let states = rng.gen_range(1..=max_states);
    let pick = |rng: &mut dyn rand::RngCore| values[rng.gen_range(0..values.len())];
    let table = (0..states)
        .map(|_| {
            (0..=letters)
                .map(|_| {
                    let to = rng.gen_range(0..states);
                    let mv = if pairs { IIMove::Pair(pick(rng), pick(rng)) } else { IIMove::Single(pick(rng)) };
                    (to, mv)
                })
                .collect()
        })
        .collect();
    FsmStrategyII::new(letters, table, 0).expect("well-formed machine")
}

/// Every branch with `|stem| ≤ max_stem` and `1 ≤ |cycle| ≤ max_cycle`, in
/// canonical form without duplicates.
pub fn branch_corpus(letters: u64, max_stem: usize, max_cycle: usize) -> Vec<EventuallyPeriodicBranch> {
    let words = |len: usize| -> Vec<Vec<Letter>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out.into_iter().flat_map(|w| (0..letters).map(move |a| [w.clone(), vec![a]].concat())).collect();
        }
        out
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for stem_len in 0..=max_stem {
        for stem in words(stem_len) {
            for cycle_len in 1..=max_cycle {
                for cycle in words(cycle_len) {
                    let x = EventuallyPeriodicBranch::new(stem.clone(), cycle).expect("nonempty cycle").canonical();
                    if seen.insert(x.key()) {
                        out.push(x);
                    }
                }
            }
        }
    }
    out
}

/// `count` distinct branches drawn from [`branch_corpus`] in a seeded order.
pub fn sample_branches(
    rng: &mut impl Rng,
    count: usize,
    letters: u64,
    max_stem: usize,
    max_cycle: usize,
) -> Vec<EventuallyPeriodicBranch> {
    let mut all = branch_corpus(letters, max_stem, max_cycle);
    rand::seq::SliceRandom::shuffle(all.as_mut_slice(), rng);
    all.truncate(count);
    all
}

/// States mutually reachable with `q`, for every `q`.
fn components(u: &NodeAutomaton) -> Vec<usize> {
    let n = u.states();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|q| {
            let mut seen = vec![false; n];
            let mut stack = vec![q];
            seen[q] = true;
            while let Some(p) = stack.pop() {
                for c in 0..u.class_count() {
                    let (r, _) = u.step_class(p, c);
                    if !seen[r] {
                        seen[r] = true;
                        stack.push(r);
                    }
                }
            }
            seen
        })
        .collect();
    (0..n).map(|q| (0..n).find(|&p| reach[q][p] && reach[p][q]).expect("q reaches itself")).collect()
}

/// A pair `(u_f, u_{-f})` whose outputs are constant on the transitions inside
/// each strongly connected component, so that `limsup u_f = liminf u_f` on
/// every branch and `u_{-f} = -u_f`.
pub fn baire1_fixture(rng: &mut impl Rng, max_states: usize) -> (NodeAutomaton, NodeAutomaton) {
    let base = random_automaton(rng, max_states, 2, Grid::STANDARD);
    let comp = components(&base);
    let level: Vec<Dyadic> = (0..base.states()).map(|_| Grid::STANDARD.sample(rng)).collect();
    let u_f = NodeAutomaton::from_fn(base.states(), 2, |q, a| {
        let (r, out) = base.step(q, a).expect("binary letter");
        (r, if comp[q] == comp[r] { level[comp[q]] } else { out })
    })
    .expect("total table");
    let u_neg = u_f.negated();
    (u_f, u_neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_named_and_reproducible() {
        let s = Streams::new(7);
        let a: Vec<u32> = (0..4).map(|_| s.stream("corpus").gen()).collect();
        let b: Vec<u32> = (0..4).map(|_| s.stream("corpus").gen()).collect();
        let mut r1 = s.stream("corpus");
        let mut r2 = s.stream("opponents");
        assert_eq!(a, b);
        assert_ne!(r1.gen::<u64>(), r2.gen::<u64>());
    }

    #[test]
    fn branch_corpus_is_canonical_and_distinct() {
        let c = branch_corpus(2, 3, 3);
        let keys: BTreeSet<_> = c.iter().map(|x| x.key()).collect();
        assert_eq!(keys.len(), c.len());
        assert!(c.iter().all(|x| x.canonical() == *x));
        assert_eq!(branch_corpus(2, 0, 1).len(), 2);
    }

    #[test]
    fn baire1_pairs_agree() {
        let mut rng = Streams::new(1).stream("fixtures");
        for _ in 0..20 {
            let (uf, ug) = baire1_fixture(&mut rng, 3);
            for x in branch_corpus(2, 2, 2) {
                let (v, summary) = uf.eval_limsup(&x).unwrap();
                assert_eq!(v, summary.liminf());
                assert_eq!(v, -ug.eval_limsup(&x).unwrap().0);
            }
        }
    }
}
