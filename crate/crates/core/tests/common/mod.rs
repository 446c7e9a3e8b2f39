//! Brute-force references built only from single transition steps.
#![allow(dead_code)]

use limsup_core::{Dyadic, EventuallyPeriodicBranch, Letter, NodeAutomaton, Prefix};

pub fn d(z: i128, n: u32) -> Dyadic {
    Dyadic::new(z, n)
}

pub fn branch(stem: &[Letter], cycle: &[Letter]) -> EventuallyPeriodicBranch {
    EventuallyPeriodicBranch::new(stem.to_vec(), cycle.to_vec()).unwrap()
}

/// Every word over `0..letters` of length exactly `len`.
pub fn words(letters: u64, len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| (0..letters).map(move |a| {
                let mut w = w.clone();
                w.push(a);
                w
            }))
            .collect();
    }
    out
}

/// Every word of length `0..=max_len`.
pub fn words_upto(letters: u64, max_len: usize) -> Vec<Vec<Letter>> {
    (0..=max_len).flat_map(|l| words(letters, l)).collect()
}

pub fn prefixes_upto(letters: u64, max_len: usize) -> Vec<Prefix> {
    words_upto(letters, max_len).into_iter().map(Prefix::new).collect()
}

/// Outputs of `u` on the first `len` letters of `x`, started from `q`.
pub fn outputs_from(u: &NodeAutomaton, q: usize, x: &EventuallyPeriodicBranch, len: usize) -> Vec<Dyadic> {
    let mut state = q;
    (0..len)
        .map(|t| {
            let (r, out) = u.step(state, x.letter_at(t)).unwrap();
            state = r;
            out
        })
        .collect()
}

/// `limsup` of the outputs along `x` from `q`. After `|stem| + states·|cycle|`
/// letters the pair (state, cycle position) has repeated, so the run is
/// periodic with period at most `states·|cycle|` from there on.
pub fn limsup_from(u: &NodeAutomaton, q: usize, x: &EventuallyPeriodicBranch) -> Dyadic {
    let settle = x.stem().len() + u.states() * x.cycle().len();
    let window = u.states() * x.cycle().len();
    let outs = outputs_from(u, q, x, settle + window);
    outs[settle..].iter().copied().max().unwrap()
}

pub fn limsup(u: &NodeAutomaton, x: &EventuallyPeriodicBranch) -> Dyadic {
    limsup_from(u, u.initial(), x)
}

pub fn liminf(u: &NodeAutomaton, x: &EventuallyPeriodicBranch) -> Dyadic {
    let settle = x.stem().len() + u.states() * x.cycle().len();
    let window = u.states() * x.cycle().len();
    let outs = outputs_from(u, u.initial(), x, settle + window);
    outs[settle..].iter().copied().min().unwrap()
}

/// `max` of all outputs along `x` from `q`.
pub fn run_max_from(u: &NodeAutomaton, q: usize, x: &EventuallyPeriodicBranch) -> Dyadic {
    let len = x.stem().len() + (u.states() + 1) * x.cycle().len();
    outputs_from(u, q, x, len).into_iter().max().unwrap()
}

/// `inf` over infinite runs from `q` of the largest output: every run can be
/// improved to one of the form `w c^ω` with `|w| < states`, `|c| ≤ states`.
pub fn lasso_min(u: &NodeAutomaton, q: usize) -> Dyadic {
    let n = u.states();
    let mut best: Option<Dyadic> = None;
    for w in words_upto(u.letters(), n - 1) {
        for cl in 1..=n {
            for c in words(u.letters(), cl) {
                let v = run_max_from(u, q, &branch(&w, &c));
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
    }
    best.unwrap()
}

pub fn state_after(u: &NodeAutomaton, s: &[Letter]) -> usize {
    s.iter().fold(u.initial(), |q, &a| u.step(q, a).unwrap().0)
}

/// `inf{ sup_{t ≥ n} u(y_0..y_t) : y ⊇ s }` by extending `s` with every word up
/// to depth `n` and closing with the best lasso.
pub fn level_inf(u: &NodeAutomaton, n: usize, s: &[Letter]) -> Dyadic {
    if n <= s.len() {
        let mut q = u.initial();
        let mut fixed: Option<Dyadic> = None;
        for (t, &a) in s.iter().enumerate() {
            let (r, out) = u.step(q, a).unwrap();
            if t >= n {
                fixed = Some(fixed.map_or(out, |f| f.max(out)));
            }
            q = r;
        }
        let tail = lasso_min(u, q);
        fixed.map_or(tail, |f| f.max(tail))
    } else {
        words(u.letters(), n - s.len())
            .into_iter()
            .map(|w| lasso_min(u, state_after(u, &[s, &w[..]].concat())))
            .min()
            .unwrap()
    }
}

/// Least multiple of `2^-n` that is `≥ v`, by scanning up from `floor(v)`.
pub fn ceil_scan(v: Dyadic, n: u32) -> Dyadic {
    let step = Dyadic::new(1, n);
    let mut z = Dyadic::from_int(v.numerator().div_euclid(1 << v.exponent()));
    while z < v {
        z = z + step;
    }
    z
}
