//! Non-increasing families `g_0 ≥ g_1 ≥ ...` of lower semicontinuous functions,
//! presented by their cylinder infima `h_n(s) = inf{ g_n(y) : y ∈ O(s) }`.
//!
//! Every family here has attained, grid-valued infima, which is what makes
//! `O(s) ⊆ {g_n > r}` equivalent to `r < h_n(s)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::automaton::NodeAutomaton;
use crate::dyadic::ExtValue;
use crate::error::{Error, Result};
use crate::minmax::{minmax_all, stabilization_cap, tail_infima, TailInfo, WeightedGraph};
use crate::tree::{FullTree, Prefix};

/// Node-infimum oracle for a non-increasing family of lsc functions.
///
/// Invariants: `node_inf(n, s) ≤ node_inf(n, s⌢a)`, `node_inf(n+1, s) ≤ node_inf(n, s)`,
/// finite values lie on the `2^-grid_exponent(n)` grid, and
/// `inf_all(s) = inf_n node_inf(n, s)` is reached at `stabilization_index(s)`.
/// For prefixes outside the tree the cylinder is empty and the infimum is `+∞`.
pub trait GridLscFamily: Send + Sync {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue;

    /// `node_inf(n, s)` for `n = 0..=upto`.
    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        (0..=upto).map(|n| self.node_inf(n, s)).collect()
    }

    fn inf_all(&self, s: &Prefix) -> Result<ExtValue>;

    fn grid_exponent(&self, level: usize) -> u32;

    /// Least `N` with `node_inf(n, s) = inf_all(s)` for every `n ≥ N`.
    fn stabilization_index(&self, s: &Prefix) -> Result<usize>;

    fn tree(&self) -> FullTree;
}

impl<F: GridLscFamily + ?Sized> GridLscFamily for Box<F> {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        (**self).node_inf(level, s)
    }
    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        (**self).node_inf_levels(s, upto)
    }
    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        (**self).inf_all(s)
    }
    fn grid_exponent(&self, level: usize) -> u32 {
        (**self).grid_exponent(level)
    }
    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        (**self).stabilization_index(s)
    }
    fn tree(&self) -> FullTree {
        (**self).tree()
    }
}

impl<F: GridLscFamily + ?Sized> GridLscFamily for Arc<F> {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        (**self).node_inf(level, s)
    }
    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        (**self).node_inf_levels(s, upto)
    }
    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        (**self).inf_all(s)
    }
    fn grid_exponent(&self, level: usize) -> u32 {
        (**self).grid_exponent(level)
    }
    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        (**self).stabilization_index(s)
    }
    fn tree(&self) -> FullTree {
        (**self).tree()
    }
}

/// First level in `0..=bound` at which the family reaches `inf_all(s)`.
pub(crate) fn first_level_reaching(fam: &dyn GridLscFamily, s: &Prefix, bound: usize) -> Result<usize> {
    let target = fam.inf_all(s)?;
    fam.node_inf_levels(s, bound)
        .iter()
        .position(|&v| v == target)
        .ok_or_else(|| Error::StabilizationCap { prefix: s.clone(), cap: bound })
}

/// Suffix maxima of `outputs`: `out[n] = max(outputs[n..])`, `-∞` for `n = len`.
pub(crate) fn suffix_maxima(outputs: &[crate::dyadic::Dyadic]) -> Vec<ExtValue> {
    let mut out = vec![ExtValue::MinusInfinity; outputs.len() + 1];
    for n in (0..outputs.len()).rev() {
        out[n] = out[n + 1].max(ExtValue::Finite(outputs[n]));
    }
    out
}

/// `g_n(x) = sup{ u(x_0..x_t) : t ≥ n }` for a finite-state `u`.
#[derive(Clone, Debug)]
pub struct AutomatonFamily {
    u: NodeAutomaton,
    minmax: Vec<ExtValue>,
    tails: Vec<TailInfo>,
}

impl AutomatonFamily {
    pub fn new(u: NodeAutomaton) -> Result<Self> {
        let minmax = minmax_all(&WeightedGraph::of_automaton(&u));
        let succ: Vec<Vec<usize>> =
            (0..u.states()).map(|q| (0..u.class_count()).map(|c| u.step_class(q, c).0).collect()).collect();
        let cap = stabilization_cap(u.states());
        let tails =
            tail_infima(&succ, &minmax, cap).map_err(|_| Error::StabilizationCap { prefix: Prefix::empty(), cap })?;
        Ok(AutomatonFamily { u, minmax, tails })
    }

    pub fn automaton(&self) -> &NodeAutomaton {
        &self.u
    }

    /// `min` over infinite runs from each state of the largest output.
    pub fn minmax_table(&self) -> &[ExtValue] {
        &self.minmax
    }
}

/// The family `g_n(x) = sup_{t ≥ n} u(x_0..x_t)`.
pub fn family_from_automaton(u: &NodeAutomaton) -> Result<AutomatonFamily> {
    AutomatonFamily::new(u.clone())
}

impl GridLscFamily for AutomatonFamily {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        let Some((q, outs)) = self.u.run(s.letters()) else {
            return ExtValue::PlusInfinity;
        };
        if level <= s.len() {
            let fixed = outs[level..].iter().copied().max().map_or(ExtValue::MinusInfinity, ExtValue::Finite);
            fixed.max(self.minmax[q])
        } else {
            self.tails[q].at(level - s.len())
        }
    }

    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        let Some((q, outs)) = self.u.run(s.letters()) else {
            return vec![ExtValue::PlusInfinity; upto + 1];
        };
        let fixed = suffix_maxima(&outs);
        (0..=upto)
            .map(|n| if n <= s.len() { fixed[n].max(self.minmax[q]) } else { self.tails[q].at(n - s.len()) })
            .collect()
    }

    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        Ok(match self.u.state_after(s.letters()) {
            Some(q) => self.tails[q].inf,
            None => ExtValue::PlusInfinity,
        })
    }

    fn grid_exponent(&self, _level: usize) -> u32 {
        self.u.grid_exponent()
    }

    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        let Some(q) = self.u.state_after(s.letters()) else {
            return Ok(0);
        };
        first_level_reaching(self, s, s.len() + self.tails[q].stable_at)
    }

    fn tree(&self) -> FullTree {
        self.u.tree()
    }
}

/// Pointwise grid ceiling: level `n` is rounded up to the `2^-n` grid.
#[derive(Clone, Debug)]
pub struct Discretized<F> {
    inner: F,
}

impl<F: GridLscFamily> Discretized<F> {
    pub fn new(inner: F) -> Self {
        Discretized { inner }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

/// Level `n` of the result is `dyadic_ceil_to_grid(node_inf(n, ·), n)`.
pub fn discretize<F: GridLscFamily>(f: F) -> Discretized<F> {
    Discretized::new(f)
}

fn level_exponent(level: usize) -> u32 {
    u32::try_from(level).unwrap_or(u32::MAX)
}

impl<F: GridLscFamily> GridLscFamily for Discretized<F> {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        self.inner.node_inf(level, s).ceil_to_grid(level_exponent(level))
    }

    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        self.inner
            .node_inf_levels(s, upto)
            .into_iter()
            .enumerate()
            .map(|(n, v)| v.ceil_to_grid(level_exponent(n)))
            .collect()
    }

    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        // finitely many grid values: the ceiling is exact once n passes the value's exponent
        self.inner.inf_all(s)
    }

    fn grid_exponent(&self, level: usize) -> u32 {
        level_exponent(level).min(self.inner.grid_exponent(level))
    }

    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        let exp = match self.inner.inf_all(s)? {
            ExtValue::Finite(d) => d.exponent() as usize,
            _ => 0,
        };
        let bound = self.inner.stabilization_index(s)?.max(exp);
        first_level_reaching(self, s, bound)
    }

    fn tree(&self) -> FullTree {
        self.inner.tree()
    }
}

type LevelFn = dyn Fn(usize, &Prefix) -> ExtValue + Send + Sync;
type PrefixFn<T> = dyn Fn(&Prefix) -> T + Send + Sync;

/// A family given directly by procedures. The caller is responsible for the
/// family invariants; [`check_family_invariants`] can sample them.
pub struct OracleFamily {
    node_inf: Box<LevelFn>,
    inf_all: Box<PrefixFn<ExtValue>>,
    stabilization: Box<PrefixFn<usize>>,
    grid_exponent: Box<dyn Fn(usize) -> u32 + Send + Sync>,
    tree: FullTree,
}

impl OracleFamily {
    pub fn new(
        tree: FullTree,
        node_inf: impl Fn(usize, &Prefix) -> ExtValue + Send + Sync + 'static,
        inf_all: impl Fn(&Prefix) -> ExtValue + Send + Sync + 'static,
        stabilization: impl Fn(&Prefix) -> usize + Send + Sync + 'static,
        grid_exponent: impl Fn(usize) -> u32 + Send + Sync + 'static,
    ) -> Self {
        OracleFamily {
            node_inf: Box::new(node_inf),
            inf_all: Box::new(inf_all),
            stabilization: Box::new(stabilization),
            grid_exponent: Box::new(grid_exponent),
            tree,
        }
    }

    /// `g_n ≡ c` for every `n`.
    pub fn constant(tree: FullTree, c: ExtValue) -> Self {
        let e = c.finite().map_or(0, |d| d.exponent());
        Self::new(tree, move |_, _| c, move |_| c, |_| 0, move |_| e)
    }
}

impl GridLscFamily for OracleFamily {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        (self.node_inf)(level, s)
    }
    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        Ok((self.inf_all)(s))
    }
    fn grid_exponent(&self, level: usize) -> u32 {
        (self.grid_exponent)(level)
    }
    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        Ok((self.stabilization)(s))
    }
    fn tree(&self) -> FullTree {
        self.tree
    }
}

/// A single lsc function `g(y) = sup{ u(y_0..y_t) : t ≥ depth }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LscLevel {
    pub automaton: NodeAutomaton,
    pub depth: usize,
}

impl LscLevel {
    pub fn new(automaton: NodeAutomaton, depth: usize) -> Self {
        LscLevel { automaton, depth }
    }
}

/// Synchronous product of several delayed sup-of-outputs functions; the
/// output at depth `t` is the max over components with `t ≥ depth_i`.
#[derive(Clone, Debug)]
struct DelayedMaxProduct {
    components: Vec<LscLevel>,
    // per product state, per class: (next id, output)
    edges: Vec<Vec<(usize, ExtValue)>>,
    minmax: Vec<ExtValue>,
    initial: usize,
}

impl DelayedMaxProduct {
    fn new(components: Vec<LscLevel>) -> Self {
        let clamp = components.iter().map(|c| c.depth).max().unwrap_or(0);
        let classes = components[0].automaton.class_count();
        let init_key = (components.iter().map(|c| c.automaton.initial()).collect::<Vec<_>>(), 0);
        let mut ids = HashMap::new();
        let mut keys = vec![init_key.clone()];
        ids.insert(init_key, 0);
        let mut edges: Vec<Vec<(usize, ExtValue)>> = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let (qs, depth) = keys[i].clone();
            let mut row = Vec::with_capacity(classes);
            for c in 0..classes {
                let mut next = Vec::with_capacity(qs.len());
                let mut out = ExtValue::MinusInfinity;
                for (comp, &q) in components.iter().zip(&qs) {
                    let (r, o) = comp.automaton.step_class(q, c);
                    next.push(r);
                    if depth >= comp.depth {
                        out = out.max(ExtValue::Finite(o));
                    }
                }
                let key = (next, (depth + 1).min(clamp));
                let id = *ids.entry(key.clone()).or_insert_with(|| {
                    keys.push(key);
                    keys.len() - 1
                });
                row.push((id, out));
            }
            edges.push(row);
            i += 1;
        }
        let minmax = minmax_all(&WeightedGraph { succ: edges.clone() });
        DelayedMaxProduct { components, edges, minmax, initial: 0 }
    }

    fn node_inf(&self, s: &Prefix) -> ExtValue {
        let first = &self.components[0].automaton;
        let mut p = self.initial;
        let mut fixed = ExtValue::MinusInfinity;
        for &a in s.letters() {
            let Some(c) = first.class_index(a) else {
                return ExtValue::PlusInfinity;
            };
            let (next, o) = self.edges[p][c];
            fixed = fixed.max(o);
            p = next;
        }
        fixed.max(self.minmax[p])
    }
}

/// Pointwise tail suprema `g'_n = max(g_n, .., g_N)` of a finite list of levels,
/// with `g_m = g_N` for `m ≥ N`.
#[derive(Clone, Debug)]
pub struct RegularizedFamily {
    products: Vec<DelayedMaxProduct>,
    tree: FullTree,
    grid: u32,
}

impl RegularizedFamily {
    pub fn new(levels: Vec<LscLevel>) -> Result<Self> {
        let first = levels.first().ok_or(Error::EmptyLevels)?;
        for l in &levels[1..] {
            crate::minmax::check_same_alphabet(&first.automaton, &l.automaton)?;
        }
        let tree = first.automaton.tree();
        let grid = levels.iter().map(|l| l.automaton.grid_exponent()).max().unwrap_or(0);
        let products = (0..levels.len()).map(|n| DelayedMaxProduct::new(levels[n..].to_vec())).collect();
        Ok(RegularizedFamily { products, tree, grid })
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    /// Product size per level, for reporting.
    pub fn product_sizes(&self) -> Vec<usize> {
        self.products.iter().map(|p| p.edges.len()).collect()
    }
}

/// Tail-supremum regularization of a finite list of levels.
pub fn regularize_nonincreasing(levels: Vec<LscLevel>) -> Result<RegularizedFamily> {
    RegularizedFamily::new(levels)
}

impl GridLscFamily for RegularizedFamily {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        self.products[level.min(self.products.len() - 1)].node_inf(s)
    }

    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        Ok(self.node_inf(self.products.len() - 1, s))
    }

    fn grid_exponent(&self, _level: usize) -> u32 {
        self.grid
    }

    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        first_level_reaching(self, s, self.products.len() - 1)
    }

    fn tree(&self) -> FullTree {
        self.tree
    }
}

/// Samples the family invariants on the given `(level, prefix, letter)` triples;
/// returns a description of the first violation.
pub fn check_family_invariants(
    fam: &dyn GridLscFamily,
    samples: impl IntoIterator<Item = (usize, Prefix, u64)>,
) -> std::result::Result<(), String> {
    for (n, s, a) in samples {
        let here = fam.node_inf(n, &s);
        let child = fam.node_inf(n, &s.extend(a));
        if here > child {
            return Err(format!("not monotone in s at n={n}, s={s:?}, a={a}: {here} > {child}"));
        }
        let next = fam.node_inf(n + 1, &s);
        if next > here {
            return Err(format!("not non-increasing in n at n={n}, s={s:?}: {next} > {here}"));
        }
        if let ExtValue::Finite(d) = here {
            if d.exponent() > fam.grid_exponent(n) {
                return Err(format!("value {d} at n={n}, s={s:?} is off the 2^-{} grid", fam.grid_exponent(n)));
            }
        }
        let all = fam.inf_all(&s).map_err(|e| e.to_string())?;
        if all > here {
            return Err(format!("inf_all {all} exceeds node_inf {here} at n={n}, s={s:?}"));
        }
        let stab = fam.stabilization_index(&s).map_err(|e| e.to_string())?;
        if fam.node_inf(stab, &s) != all || fam.node_inf(stab + 3, &s) != all {
            return Err(format!("family not stable at its stabilization index {stab} for s={s:?}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;

    fn p(v: &[u64]) -> Prefix {
        Prefix::from(v)
    }

    fn fin(z: i128, n: u32) -> ExtValue {
        ExtValue::Finite(Dyadic::new(z, n))
    }

    #[test]
    fn letter_output_family_table() {
        let fam = family_from_automaton(&NodeAutomaton::letter_output(2)).unwrap();
        // h_n(s) = 1 iff s has a 1 at depth >= n
        for s in [p(&[]), p(&[1]), p(&[0, 1]), p(&[1, 0, 0]), p(&[0, 0, 1, 0])] {
            for n in 0..8 {
                let expect = s.letters().iter().enumerate().any(|(t, &a)| t >= n && a == 1);
                assert_eq!(fam.node_inf(n, &s), fin(expect as i128, 0), "n={n} s={s:?}");
            }
            assert_eq!(fam.inf_all(&s).unwrap(), fin(0, 0));
        }
        assert_eq!(fam.stabilization_index(&p(&[0, 1, 0])).unwrap(), 2);
        assert_eq!(fam.node_inf(0, &p(&[2])), ExtValue::PlusInfinity);
    }

    #[test]
    fn discretize_rounds_up_per_level() {
        let u = NodeAutomaton::constant(Dyadic::new(3, 3), 2);
        let fam = discretize(family_from_automaton(&u).unwrap());
        assert_eq!(fam.node_inf(0, &p(&[])), fin(1, 0));
        assert_eq!(fam.node_inf(1, &p(&[0])), fin(1, 1));
        assert_eq!(fam.node_inf(2, &p(&[0])), fin(1, 1));
        assert_eq!(fam.node_inf(3, &p(&[0])), fin(3, 3));
        assert_eq!(fam.stabilization_index(&p(&[0])).unwrap(), 3);
        assert_eq!(fam.grid_exponent(1), 1);
    }

    #[test]
    fn regularize_rejects_empty() {
        assert_eq!(regularize_nonincreasing(vec![]).unwrap_err(), Error::EmptyLevels);
    }

    #[test]
    fn regularize_single_level_is_identity() {
        let u = NodeAutomaton::letter_output(2);
        let fam = family_from_automaton(&u).unwrap();
        let reg = regularize_nonincreasing(vec![LscLevel::new(u, 2)]).unwrap();
        for s in [p(&[]), p(&[1, 1]), p(&[0, 0, 1]), p(&[1, 0, 0, 0])] {
            for n in 0..4 {
                assert_eq!(reg.node_inf(n, &s), fam.node_inf(2, &s));
            }
        }
    }

    #[test]
    fn constant_oracle_family() {
        let fam = OracleFamily::constant(FullTree::BINARY, fin(5, 1));
        assert_eq!(fam.node_inf(9, &p(&[1, 0])), fin(5, 1));
        assert_eq!(fam.grid_exponent(0), 1);
    }
}
