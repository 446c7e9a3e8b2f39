//! Membership scans over a fine dyadic grid, kept apart from the reduced
//! formulas they are compared with.

use limsup_core::{Dyadic, ExtValue, NodeAutomaton, Prefix};

/// Grid step exponent and bound of the scan: `k/64` for `|k/64| ≤ 8`.
pub const SCAN_EXPONENT: u32 = 6;
pub const SCAN_BOUND: i128 = 8;

fn scan_grid() -> impl Iterator<Item = Dyadic> {
    let k = SCAN_BOUND << SCAN_EXPONENT;
    (-k..=k).map(|z| Dyadic::new(z, SCAN_EXPONENT))
}

/// Every word of length `len` over `0..letters`.
fn words(letters: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| (0..letters).map(move |a| [w.clone(), vec![a]].concat())).collect();
    }
    out
}

/// Largest output along the run of `w c^ω` from `q`.
fn run_max(u: &NodeAutomaton, q: usize, w: &[u64], c: &[u64]) -> Dyadic {
    let mut best: Option<Dyadic> = None;
    let mut state = q;
    let mut take = |state: &mut usize, a: u64| {
        let (r, out) = u.step(*state, a).expect("letter in range");
        best = Some(best.map_or(out, |b| b.max(out)));
        *state = r;
    };
    for &a in w {
        take(&mut state, a);
    }
    let mut seen = vec![];
    while !seen.contains(&state) {
        seen.push(state);
        for &a in c {
            take(&mut state, a);
        }
    }
    best.expect("nonempty cycle")
}

/// `inf` over runs from `q` of the largest output, by enumerating simple
/// stems and cycles.
fn lasso_min(u: &NodeAutomaton, q: usize) -> Dyadic {
    let k = u.letters();
    let n = u.states();
    let mut best: Option<Dyadic> = None;
    for wl in 0..n {
        for w in words(k, wl) {
            for cl in 1..=n {
                for c in words(k, cl) {
                    let v = run_max(u, q, &w, &c);
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
    }
    best.expect("some lasso")
}

fn ceil_to(v: Dyadic, n: u32) -> Dyadic {
    let e = v.exponent();
    if e <= n {
        return v;
    }
    let d = 1i128 << (e - n);
    Dyadic::new(-(-v.numerator()).div_euclid(d), n)
}

/// A machine with the run minima of every state precomputed.
pub struct Scanner<'a> {
    u: &'a NodeAutomaton,
    tails: Vec<Dyadic>,
}

impl<'a> Scanner<'a> {
    pub fn new(u: &'a NodeAutomaton) -> Scanner<'a> {
        Scanner { u, tails: (0..u.states()).map(|q| lasso_min(u, q)).collect() }
    }

    /// `inf{ sup_{t ≥ n} u(y_0..y_t) : y ⊇ s }`, rounded up to the `2^-n` grid.
    pub fn level_inf(&self, n: usize, s: &Prefix) -> Dyadic {
        let u = self.u;
        let (q, outs) = u.run(s.letters()).expect("prefix in the tree");
        let raw = if n <= s.len() {
            let tail = self.tails[q];
            outs[n..].iter().copied().max().map_or(tail, |f| f.max(tail))
        } else {
            let mut reach = vec![q];
            for _ in 0..n - s.len() {
                let mut next: Vec<usize> = reach
                    .iter()
                    .flat_map(|&p| (0..u.letters()).map(move |a| (p, a)))
                    .map(|(p, a)| u.step(p, a).expect("letter in range").0)
                    .collect();
                next.sort_unstable();
                next.dedup();
                reach = next;
            }
            reach.iter().map(|&p| self.tails[p]).min().expect("nonempty")
        };
        ceil_to(raw, n.min(u32::MAX as usize) as u32)
    }

    /// Scans the grid, testing the defining conditions of `R_*(s)`, `R_n(s)` and
    /// `R(s)` against every level `n ≤ max_level` and every proper initial
    /// segment of `s`. A down-closed or half-open grid set `{.. < h}` has
    /// supremum `max member + 2^-6`.
    pub fn scan_prefix(&self, s: &Prefix, max_level: usize) -> ScanResult {
        let h: Vec<Vec<Dyadic>> = (0..=s.len())
            .map(|len| (0..=max_level).map(|n| self.level_inf(n, &s.truncate(len))).collect())
            .collect();
        let here = &h[s.len()];
        let step = Dyadic::new(1, SCAN_EXPONENT);
        let sup_of = |members: Vec<Dyadic>| members.into_iter().max().map(|m| m + step);
        let in_rstar = |r: Dyadic| here.iter().all(|&v| r < v);
        let in_rn = |n: usize, r: Dyadic| r < here[n] && h[..s.len()].iter().all(|p| !(r < p[n]));
        let rstar =
            sup_of(scan_grid().filter(|&r| in_rstar(r)).collect()).map_or(ExtValue::MinusInfinity, ExtValue::Finite);
        let rn = (0..=max_level)
            .map(|n| sup_of(scan_grid().filter(|&r| in_rn(n, r)).collect()).map(ExtValue::Finite))
            .collect();
        let all = scan_grid().filter(|&r| in_rstar(r) || (0..=max_level).any(|n| in_rn(n, r))).collect();
        let u_val = sup_of(all).unwrap_or(Dyadic::from_int(-(s.len() as i128)));
        ScanResult { rstar, rn, u: u_val }
    }
}

/// Suprema read off the membership scan for one prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanResult {
    pub rstar: ExtValue,
    /// `sup R_n(s)` for `n = 0..levels.len()`, `None` when empty.
    pub rn: Vec<Option<ExtValue>>,
    pub u: Dyadic,
}
