//! Building a node labeling `u` from a non-increasing grid-valued lsc family.
//!
//! For a node `s`:
//! * `R_*(s) = { r : O(s) ⊆ ⋂_n {g_n > r} } = { r : r < h_n(s) for all n }`,
//! * `R_n(s) = { r : O(s) ⊆ {g_n > r} }` minus the `r` already witnessed by a
//!   proper initial segment; monotonicity of `h_n` along prefixes makes this
//!   `[h_n(parent), h_n(s))`, and `(-∞, h_n(root))` at the root,
//! * `u(s) = sup (R_*(s) ∪ ⋃_n R_n(s))`, or `-length(s)` when that union is empty.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use crate::automaton::{NodeAutomaton, NodeFunction, LetterClass, Transition};
use crate::dyadic::{Dyadic, ExtValue};
use crate::error::{Error, Result};
use crate::family::GridLscFamily;
use crate::tree::{EventuallyPeriodicBranch, Prefix};

/// `sup R_*(s)`; `-∞` means `R_*(s)` is empty.
pub fn rstar_sup(fam: &dyn GridLscFamily, s: &Prefix) -> Result<ExtValue> {
    fam.inf_all(s)
}

/// `sup R_n(s)` when `R_n(s)` is nonempty.
pub fn rn_sup(fam: &dyn GridLscFamily, n: usize, s: &Prefix) -> Option<ExtValue> {
    let here = fam.node_inf(n, s);
    match s.parent() {
        None => (here > ExtValue::MinusInfinity).then_some(here),
        Some(parent) => (fam.node_inf(n, &parent) < here).then_some(here),
    }
}

/// Which part of `R(s)` attains the supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UWitness {
    RStar,
    Level(usize),
    /// `R(s)` is empty and `u(s) = -length(s)`.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UEntry {
    pub value: Dyadic,
    pub witness: UWitness,
    /// Levels scanned: `0..=levels_scanned`.
    pub levels_scanned: usize,
}

/// `u(s)` together with how it was obtained. The level scan stops once both
/// `s` and its parent have stabilized: from there on `R_n(s)` no longer
/// depends on `n`.
pub fn construct_u_entry(fam: &dyn GridLscFamily, s: &Prefix) -> Result<UEntry> {
    let parent = s.parent();
    let mut bound = fam.stabilization_index(s)?;
    if let Some(p) = &parent {
        bound = bound.max(fam.stabilization_index(p)?);
    }
    let here = fam.node_inf_levels(s, bound);
    let above = parent.as_ref().map(|p| fam.node_inf_levels(p, bound));

    let mut best: Option<(ExtValue, UWitness)> = None;
    let mut offer = |v: ExtValue, w: UWitness| {
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, w));
        }
    };
    let rstar = fam.inf_all(s)?;
    if rstar > ExtValue::MinusInfinity {
        offer(rstar, UWitness::RStar);
    }
    for n in 0..=bound {
        let nonempty = match &above {
            None => here[n] > ExtValue::MinusInfinity,
            Some(a) => a[n] < here[n],
        };
        if nonempty {
            offer(here[n], UWitness::Level(n));
        }
    }
    match best {
        None => Ok(UEntry { value: Dyadic::from_int(-(s.len() as i128)), witness: UWitness::Empty, levels_scanned: bound }),
        Some((ExtValue::Finite(v), w)) => Ok(UEntry { value: v, witness: w, levels_scanned: bound }),
        Some((v, _)) => Err(Error::Oracle(format!("sup R(s) = {v} is not finite at s = {s:?}"))),
    }
}

/// `u(s) = sup R(s)`, or `-length(s)` when `R(s)` is empty.
pub fn construct_u(fam: &dyn GridLscFamily, s: &Prefix) -> Result<Dyadic> {
    construct_u_entry(fam, s).map(|e| e.value)
}

/// Lazily evaluated `u` over a family, memoized per prefix.
pub struct ConstructedU<F> {
    family: F,
    cache: RwLock<HashMap<Prefix, UEntry>>,
}

impl<F: GridLscFamily> ConstructedU<F> {
    pub fn new(family: F) -> Self {
        ConstructedU { family, cache: RwLock::new(HashMap::new()) }
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn entry(&self, s: &Prefix) -> Result<UEntry> {
        if let Some(e) = self.cache.read().expect("cache poisoned").get(s) {
            return Ok(*e);
        }
        let e = construct_u_entry(&self.family, s)?;
        self.cache.write().expect("cache poisoned").insert(s.clone(), e);
        Ok(e)
    }

    pub fn cached_prefixes(&self) -> usize {
        self.cache.read().expect("cache poisoned").len()
    }
}

impl<F: GridLscFamily> NodeFunction for ConstructedU<F> {
    fn value(&self, s: &Prefix) -> Result<Dyadic> {
        self.entry(s).map(|e| e.value)
    }
}

/// Limsup of a node function along a branch, read off a repeating segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegmentLimsup {
    pub value: Dyadic,
    pub segment_start: usize,
    pub period: usize,
}

/// How many consecutive identical windows certify a repeating segment.
pub const REPEAT_WINDOWS: usize = 3;

/// Scans `u(x_0..x_t)` in windows of `period` starting at `start + k·period`
/// and returns the max over the first window that repeats
/// [`REPEAT_WINDOWS`] times in a row. `None` when no such window appears
/// before `max_windows`.
///
/// `start`/`period` should come from a lasso of whatever finite-state data
/// drives `u` along `x`; the values then become periodic with that period.
pub fn oracle_limsup(
    u: &dyn NodeFunction,
    x: &EventuallyPeriodicBranch,
    start: usize,
    period: usize,
    max_windows: usize,
) -> Result<Option<SegmentLimsup>> {
    assert!(period > 0);
    let total = start + (max_windows + REPEAT_WINDOWS) * period;
    let mut values = Vec::with_capacity(total);
    let mut s = Prefix::empty();
    let window = |k: usize| -> std::ops::Range<usize> {
        let a = start + k * period;
        a..a + period
    };
    for k in 0..max_windows {
        while values.len() < start + (k + REPEAT_WINDOWS) * period {
            s.push(x.letter_at(values.len()));
            values.push(u.value(&s)?);
        }
        let first = window(k);
        let repeats = (1..REPEAT_WINDOWS).all(|j| values[window(k + j)] == values[first.clone()]);
        if repeats {
            let value = *values[first.clone()].iter().max().expect("period > 0");
            return Ok(Some(SegmentLimsup { value, segment_start: first.start, period }));
        }
    }
    Ok(None)
}

/// Joint lasso of several machines read along `x`: `(start, period)` of the
/// first repetition of `(states, position in cycle)`.
pub fn joint_lasso_shape(machines: &[&NodeAutomaton], x: &EventuallyPeriodicBranch) -> Result<(usize, usize)> {
    let mut qs: Vec<usize> = machines.iter().map(|u| u.initial()).collect();
    let stem = x.stem().len();
    let period = x.cycle().len();
    let mut seen: HashMap<(Vec<usize>, usize), usize> = HashMap::new();
    let mut prefix = Prefix::empty();
    for t in 0.. {
        if t >= stem {
            let key = (qs.clone(), (t - stem) % period);
            if let Some(&first) = seen.get(&key) {
                return Ok((first, t - first));
            }
            seen.insert(key, t);
        }
        let a = x.letter_at(t);
        prefix.push(a);
        for (q, u) in qs.iter_mut().zip(machines) {
            *q = u.step(*q, a).ok_or_else(|| Error::BranchOutsideTree { prefix: prefix.clone() })?.0;
        }
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Equal,
    Mismatch,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchCheck {
    pub branch: String,
    pub expected: Dyadic,
    pub constructed: Option<SegmentLimsup>,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionReport {
    pub rows: Vec<BranchCheck>,
    /// Largest level scan used by any evaluated prefix.
    pub max_levels_scanned: usize,
}

impl ConstructionReport {
    pub fn all_equal(&self) -> bool {
        self.rows.iter().all(|r| r.status == CheckStatus::Equal)
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }
}

/// First node index, aligned with the lasso, from which the constructed
/// values along the branch repeat with the lasso period. Levels `n` more than
/// one period behind the node see a stable running maximum, and levels at or
/// above the machines' grid exponent are not rounded, so everything left
/// depends only on the position in the joint cycle.
fn periodic_from(machines: &[&NodeAutomaton], start: usize, period: usize) -> usize {
    let e = machines.iter().map(|u| u.grid_exponent() as usize).max().unwrap_or(0);
    start + period * (1 + (e + 1).div_ceil(period))
}

/// Windows scanned before a branch is reported inconclusive.
pub const VERIFY_MAX_WINDOWS: usize = 64;

/// Compares, branch by branch, `limsup_t u'(x_0..x_t)` for the constructed
/// `u'` against an exactly known `f(x)`; `machines` drive the lasso hint.
pub fn verify_against<F: GridLscFamily>(
    constructed: &ConstructedU<F>,
    machines: &[&NodeAutomaton],
    expected: impl Fn(&EventuallyPeriodicBranch) -> Result<Dyadic>,
    branches: &[EventuallyPeriodicBranch],
) -> Result<ConstructionReport> {
    let mut rows = Vec::with_capacity(branches.len());
    let mut max_levels = 0;
    for x in branches {
        let f = expected(x)?;
        let (start, period) = joint_lasso_shape(machines, x)?;
        let got = oracle_limsup(constructed, x, periodic_from(machines, start, period), period, VERIFY_MAX_WINDOWS)?;
        let status = match &got {
            None => CheckStatus::Inconclusive,
            Some(seg) if seg.value == f => CheckStatus::Equal,
            Some(_) => CheckStatus::Mismatch,
        };
        if let Some(seg) = &got {
            for t in 0..seg.segment_start + seg.period {
                max_levels = max_levels.max(constructed.entry(&x.prefix(t))?.levels_scanned);
            }
        }
        rows.push(BranchCheck { branch: x.to_string(), expected: f, constructed: got, status });
    }
    Ok(ConstructionReport { rows, max_levels_scanned: max_levels })
}

/// Checks the construction over a family derived from `source` against
/// `eval_limsup(source, ·)`.
pub fn verify_construction<F: GridLscFamily>(
    constructed: &ConstructedU<F>,
    source: &NodeAutomaton,
    branches: &[EventuallyPeriodicBranch],
) -> Result<ConstructionReport> {
    verify_against(constructed, &[source], |x| crate::automaton::eval_limsup(source, x), branches)
}

/// Tries to realize a node function as a finite-state machine over the
/// alphabet of `like`: states are distinguished by the values on all
/// extensions of length `≤ lookahead`, and the result is accepted only if it
/// agrees with `u` on every prefix of length `≤ check_depth`.
pub fn minimize(
    u: &dyn NodeFunction,
    like: &NodeAutomaton,
    lookahead: usize,
    check_depth: usize,
    max_states: usize,
) -> Result<Option<NodeAutomaton>> {
    let classes = like.class_count();
    let letter = |c: usize| like.class_representative(c);
    let mut words: Vec<Vec<u64>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..lookahead {
        let mut next = Vec::new();
        for w in &frontier {
            for c in 0..classes {
                let mut w2 = w.clone();
                w2.push(letter(c));
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words.remove(0);
    let signature = |s: &Prefix| -> Result<Vec<Dyadic>> {
        words
            .iter()
            .map(|w| {
                let mut t = s.clone();
                for &a in w {
                    t.push(a);
                }
                u.value(&t)
            })
            .collect()
    };

    let mut ids: HashMap<Vec<Dyadic>, usize> = HashMap::new();
    let mut reps: Vec<Prefix> = vec![Prefix::empty()];
    ids.insert(signature(&Prefix::empty())?, 0);
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < reps.len() {
        let s = reps[i].clone();
        for c in 0..classes {
            let t = s.extend(letter(c));
            let sig = signature(&t)?;
            let to = match ids.get(&sig) {
                Some(&id) => id,
                None => {
                    if reps.len() >= max_states {
                        return Ok(None);
                    }
                    ids.insert(sig, reps.len());
                    reps.push(t.clone());
                    reps.len() - 1
                }
            };
            let class = if (c as u64) < like.letters() { LetterClass::Letter(c as u64) } else { LetterClass::Default };
            transitions.push(Transition { from: i, class, to, output: u.value(&t)? });
        }
        i += 1;
    }
    let candidate = NodeAutomaton::new(reps.len(), 0, like.letters(), &transitions)?;

    let mut layer = vec![Prefix::empty()];
    for _ in 0..check_depth {
        let mut next = Vec::with_capacity(layer.len() * classes);
        for s in &layer {
            for c in 0..classes {
                let t = s.extend(letter(c));
                if candidate.node_value(&t)? != u.value(&t)? {
                    return Ok(None);
                }
                next.push(t);
            }
        }
        layer = next;
    }
    Ok(Some(candidate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{discretize, family_from_automaton, OracleFamily};
    use crate::tree::FullTree;

    fn p(v: &[u64]) -> Prefix {
        Prefix::from(v)
    }

    fn fin(z: i128) -> ExtValue {
        ExtValue::Finite(Dyadic::from_int(z))
    }

    #[test]
    fn rstar_and_rn_on_letter_family() {
        let fam = discretize(family_from_automaton(&NodeAutomaton::letter_output(2)).unwrap());
        assert_eq!(rstar_sup(&fam, &p(&[1])).unwrap(), fin(0));
        assert_eq!(rn_sup(&fam, 0, &p(&[1])), Some(fin(1)));
        assert_eq!(rn_sup(&fam, 0, &p(&[1, 0])), None);
        assert!(rstar_sup(&fam, &p(&[1])).unwrap() <= fam.node_inf(0, &p(&[1])));
    }

    #[test]
    fn empty_r_gives_negative_length() {
        let fam = OracleFamily::new(
            FullTree::BINARY,
            |_, _| ExtValue::MinusInfinity,
            |_| ExtValue::MinusInfinity,
            |_| 0,
            |_| 0,
        );
        assert_eq!(construct_u(&fam, &p(&[0, 1, 1])).unwrap(), Dyadic::from_int(-3));
        assert_eq!(rn_sup(&fam, 4, &p(&[])), None);
    }

    #[test]
    fn constant_family_constructs_constant() {
        let c = ExtValue::Finite(Dyadic::new(5, 2));
        let fam = OracleFamily::constant(FullTree::BINARY, c);
        assert_eq!(construct_u(&fam, &p(&[])).unwrap(), Dyadic::new(5, 2));
        let e = construct_u_entry(&fam, &p(&[1, 0])).unwrap();
        assert_eq!(e.value, Dyadic::new(5, 2));
        assert_eq!(e.witness, UWitness::RStar);
    }

    #[test]
    fn letter_family_round_trip() {
        let u = NodeAutomaton::letter_output(2);
        let cu = ConstructedU::new(discretize(family_from_automaton(&u).unwrap()));
        let branches: Vec<_> = [(vec![], vec![0, 1]), (vec![], vec![0]), (vec![1, 1], vec![0]), (vec![0], vec![1])]
            .into_iter()
            .map(|(s, c)| EventuallyPeriodicBranch::new(s, c).unwrap())
            .collect();
        let report = verify_construction(&cu, &u, &branches).unwrap();
        assert!(report.all_equal(), "{report:?}");
        assert_eq!(report.rows[0].expected, Dyadic::ONE);
        assert_eq!(report.rows[1].expected, Dyadic::ZERO);
    }

    #[test]
    fn minimize_recovers_small_machines() {
        let u = NodeAutomaton::letter_output(2);
        let m = minimize(&u, &u, 2, 6, 16).unwrap().expect("finite-state");
        assert_eq!(m.states(), 1);
        let cu = ConstructedU::new(discretize(family_from_automaton(&u).unwrap()));
        let m = minimize(&cu, &u, 3, 7, 64).unwrap().expect("finite-state");
        for t in 0..6 {
            let s = EventuallyPeriodicBranch::new(vec![1], vec![0, 1, 1]).unwrap().prefix(t);
            assert_eq!(m.node_value(&s).unwrap(), cu.value(&s).unwrap());
        }
    }
}
