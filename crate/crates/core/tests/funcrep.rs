mod common;

use common::*;
use proptest::prelude::*;

use limsup_core::corpus::{automaton_corpus, branch_corpus, random_automaton, Grid, Streams};
use limsup_core::family::{check_family_invariants, LscLevel};
use limsup_core::{
    discretize, dyadic_ceil_to_grid, eval_limsup, family_from_automaton, minmax_value, regularize_nonincreasing,
    Dyadic, ExtValue, FullTree, GridLscFamily, NodeAutomaton, Prefix, TreeSpec,
};

#[test]
fn ceiling_matches_grid_scan() {
    assert_eq!(dyadic_ceil_to_grid(d(3, 3), 1), d(1, 1));
    assert_eq!(dyadic_ceil_to_grid(d(-3, 3), 2), d(-1, 2));
    for z in -40..=40 {
        for e in 0..6 {
            let v = d(z, e);
            for n in 0..8 {
                assert_eq!(dyadic_ceil_to_grid(v, n), ceil_scan(v, n), "{v} on 2^-{n}");
            }
        }
    }
}

#[test]
fn eval_limsup_matches_simulation() {
    let mut rng = Streams::new(11).stream("funcrep");
    let branches = branch_corpus(2, 4, 4);
    for _ in 0..40 {
        let u = random_automaton(&mut rng, 5, 2, Grid::STANDARD);
        for x in &branches {
            assert_eq!(eval_limsup(&u, x).unwrap(), limsup(&u, x), "{x}");
        }
    }
}

#[test]
fn letter_machine_examples() {
    let u = NodeAutomaton::letter_output(2);
    assert_eq!(eval_limsup(&u, &branch(&[], &[0])).unwrap(), Dyadic::ZERO);
    assert_eq!(eval_limsup(&u, &branch(&[0], &[0, 1])).unwrap(), Dyadic::ONE);
    assert_eq!(limsup(&u, &branch(&[0], &[0, 1])), Dyadic::ONE);
}

#[test]
fn minmax_matches_lasso_enumeration() {
    let mut rng = Streams::new(12).stream("funcrep");
    for u in automaton_corpus(&mut rng, 60, 4) {
        for q in 0..u.states() {
            assert_eq!(minmax_value(&u, q), ExtValue::Finite(lasso_min(&u, q)));
        }
    }
    assert_eq!(minmax_value(&NodeAutomaton::letter_output(2), 0), ExtValue::Finite(Dyadic::ZERO));
    // only the cycle 1 -> 1 avoids the large output
    let half = d(1, 1);
    let u = NodeAutomaton::from_fn(2, 2, |q, a| match (q, a) {
        (0, _) => (1, Dyadic::ZERO),
        (_, 0) => (1, half),
        _ => (0, Dyadic::ONE),
    })
    .unwrap();
    assert_eq!(minmax_value(&u, 0), ExtValue::Finite(half));
    assert_eq!(lasso_min(&u, 0), half);
}

#[test]
fn letter_family_levels() {
    let u = NodeAutomaton::letter_output(2);
    let fam = family_from_automaton(&u).unwrap();
    for s in prefixes_upto(2, 6) {
        for n in 0..9 {
            let has_late_one = s.letters().iter().skip(n).any(|&a| a == 1);
            let want = if has_late_one { Dyadic::ONE } else { Dyadic::ZERO };
            assert_eq!(fam.node_inf(n, &s), ExtValue::Finite(want), "n={n} s={s:?}");
        }
    }
}

#[test]
fn automaton_family_matches_brute_force() {
    let mut rng = Streams::new(13).stream("funcrep");
    for u in automaton_corpus(&mut rng, 25, 3) {
        let fam = family_from_automaton(&u).unwrap();
        assert_eq!(fam.node_inf(0, &Prefix::empty()), ExtValue::Finite(lasso_min(&u, u.initial())));
        for s in prefixes_upto(2, 4) {
            for n in 0..7 {
                assert_eq!(fam.node_inf(n, &s), ExtValue::Finite(level_inf(&u, n, s.letters())), "n={n} s={s:?}");
            }
        }
    }
}

#[test]
fn family_tails_converge_to_the_limsup() {
    let mut rng = Streams::new(14).stream("funcrep");
    for u in automaton_corpus(&mut rng, 20, 3) {
        let fam = family_from_automaton(&u).unwrap();
        for x in branch_corpus(2, 3, 3) {
            let f = ExtValue::Finite(limsup(&u, &x));
            let late = x.stem().len() + 4 * x.cycle().len();
            assert_eq!(fam.node_inf(late, &x.prefix(late + 12)), f, "{x}");
            for n in 0..5 {
                assert!(fam.node_inf(n, &x.prefix(n + 8)) >= f);
            }
        }
    }
}

#[test]
fn discretized_levels_round_up() {
    let u = NodeAutomaton::constant(d(3, 3), 2);
    let fam = discretize(family_from_automaton(&u).unwrap());
    assert_eq!(fam.node_inf(1, &Prefix::new(vec![0])), ExtValue::Finite(d(1, 1)));
    let mut rng = Streams::new(15).stream("funcrep");
    for u in automaton_corpus(&mut rng, 15, 3) {
        let fam = discretize(family_from_automaton(&u).unwrap());
        for s in prefixes_upto(2, 3) {
            for n in 0..6 {
                let raw = level_inf(&u, n, s.letters());
                assert_eq!(fam.node_inf(n, &s), ExtValue::Finite(ceil_scan(raw, n as u32)));
            }
        }
    }
}

/// `inf` over extensions of `s` of `max` of the two delayed suprema.
fn crossing_inf(u1: &NodeAutomaton, u2: &NodeAutomaton, delay2: usize, s: &[u64]) -> Dyadic {
    let mut best: Option<Dyadic> = None;
    for w in words_upto(2, 5) {
        for c in words_upto(2, 4).into_iter().filter(|c| !c.is_empty()) {
            let x = branch(&[s, &w[..]].concat(), &c);
            let len = x.stem().len() + 8 * c.len() + 8;
            let a = outputs_from(u1, u1.initial(), &x, len).into_iter().max().unwrap();
            let b = outputs_from(u2, u2.initial(), &x, len).into_iter().skip(delay2).max().unwrap();
            let v = a.max(b);
            best = Some(best.map_or(v, |m| m.min(v)));
        }
    }
    best.unwrap()
}

#[test]
fn regularized_crossing_levels() {
    let mut rng = Streams::new(16).stream("funcrep");
    for _ in 0..12 {
        let u1 = random_automaton(&mut rng, 2, 2, Grid::STANDARD);
        let u2 = random_automaton(&mut rng, 2, 2, Grid::STANDARD);
        let fam = regularize_nonincreasing(vec![LscLevel::new(u1.clone(), 0), LscLevel::new(u2.clone(), 1)]).unwrap();
        for s in prefixes_upto(2, 2) {
            assert_eq!(fam.node_inf(0, &s), ExtValue::Finite(crossing_inf(&u1, &u2, 1, s.letters())), "{s:?}");
        }
    }
}

#[test]
fn regularize_single_level_is_identity() {
    let u = NodeAutomaton::letter_output(2);
    let fam = regularize_nonincreasing(vec![LscLevel::new(u.clone(), 0)]).unwrap();
    for s in prefixes_upto(2, 4) {
        assert_eq!(fam.node_inf(0, &s), ExtValue::Finite(level_inf(&u, 0, s.letters())));
    }
}

fn random_triples(seed: u64, count: usize) -> Vec<(usize, Prefix, u64)> {
    use rand::Rng;
    let mut rng = Streams::new(seed).stream("triples");
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..7);
            let s = Prefix::new((0..len).map(|_| rng.gen_range(0..2)).collect());
            (rng.gen_range(0..8), s, rng.gen_range(0..2))
        })
        .collect()
}

#[test]
fn family_invariants_on_random_triples() {
    let mut rng = Streams::new(17).stream("funcrep");
    for (i, u) in automaton_corpus(&mut rng, 6, 3).into_iter().enumerate() {
        let triples = random_triples(i as u64, 1000);
        let fam = family_from_automaton(&u).unwrap();
        check_family_invariants(&discretize(fam.clone()), triples.clone()).unwrap();
        let reg = regularize_nonincreasing(vec![LscLevel::new(u.clone(), 0), LscLevel::new(u.negated(), 2)]).unwrap();
        check_family_invariants(&discretize(reg), triples).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn member_prefixes_have_member_children(v in prop::collection::vec(0u64..4, 0..24), k in 1u64..5) {
        let tree = FullTree::with_arity(k);
        let s = Prefix::new(v.into_iter().map(|a| a % k).collect());
        prop_assert!(tree.contains(&s));
        prop_assert!(tree.contains(&s.extend(tree.child_witness(&s))));
        prop_assert!(FullTree::NATURALS.contains(&s.extend(FullTree::NATURALS.child_witness(&s))));
    }
}

proptest! {
    #[test]
    fn dyadic_sum_round_trips(a in -1000i128..1000, ea in 0u32..12, b in -1000i128..1000, eb in 0u32..12) {
        let (x, y) = (d(a, ea), d(b, eb));
        prop_assert_eq!((x + y) - y, x);
        prop_assert_eq!(x.max(y), y.max(x));
        prop_assert_eq!(x.min(x), x);
    }

    #[test]
    fn ceiling_lands_within_one_step(a in -4096i128..4096, e in 0u32..14, n in 0u32..11) {
        let v = d(a, e);
        let c = dyadic_ceil_to_grid(v, n);
        prop_assert!(c >= v);
        prop_assert!(c - v < d(1, n));
        prop_assert!(c.exponent() <= n);
    }
}
