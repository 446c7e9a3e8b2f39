//! Min-max threshold search: the least `θ` such that an infinite path exists
//! using only edges of weight `≤ θ`.

use std::collections::HashMap;

use crate::automaton::{NodeAutomaton, StateId};
use crate::dyadic::{Dyadic, ExtValue};
use crate::error::Result;

/// Edge-weighted graph; `succ[q]` lists `(target, weight)`.
#[derive(Clone, Debug, Default)]
pub struct WeightedGraph {
    pub succ: Vec<Vec<(usize, ExtValue)>>,
}

impl WeightedGraph {
    pub fn of_automaton(u: &NodeAutomaton) -> WeightedGraph {
        let succ = (0..u.states())
            .map(|q| {
                (0..u.class_count())
                    .map(|c| {
                        let (to, o) = u.step_class(q, c);
                        (to, ExtValue::Finite(o))
                    })
                    .collect()
            })
            .collect();
        WeightedGraph { succ }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    fn weights(&self) -> Vec<ExtValue> {
        let mut w: Vec<ExtValue> = self.succ.iter().flatten().map(|&(_, w)| w).collect();
        w.sort();
        w.dedup();
        w
    }
}

/// States with an infinite path through edges accepted by `keep`
/// (greatest fixed point of "has a kept edge into the set").
pub fn viable_states(succ: &[Vec<(usize, ExtValue)>], keep: impl Fn(ExtValue) -> bool) -> Vec<bool> {
    let mut alive = vec![true; succ.len()];
    loop {
        let mut changed = false;
        for q in 0..succ.len() {
            if alive[q] && !succ[q].iter().any(|&(to, w)| alive[to] && keep(w)) {
                alive[q] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

/// For every state, the least `θ` over which an infinite path exists; `+∞` when
/// the state has no infinite path at all.
pub fn minmax_all(graph: &WeightedGraph) -> Vec<ExtValue> {
    let mut value = vec![ExtValue::PlusInfinity; graph.len()];
    let mut settled = vec![false; graph.len()];
    for theta in graph.weights() {
        let alive = viable_states(&graph.succ, |w| w <= theta);
        for q in 0..graph.len() {
            if alive[q] && !settled[q] {
                settled[q] = true;
                value[q] = theta;
            }
        }
        if settled.iter().all(|&s| s) {
            break;
        }
    }
    value
}

/// `min` over infinite runs from `q` of the largest output on the run.
pub fn minmax_value(u: &NodeAutomaton, q: StateId) -> ExtValue {
    minmax_all(&WeightedGraph::of_automaton(u))[q]
}

/// How two sup-values are combined in [`joint_minmax`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Sum,
    Max,
}

impl Objective {
    pub fn apply(self, a: ExtValue, b: ExtValue) -> ExtValue {
        match self {
            Objective::Sum => a.plus(b),
            Objective::Max => a.max(b),
        }
    }
}

/// Feasibility table for pairs of thresholds on the synchronous product of two
/// machines over the same alphabet.
#[derive(Clone, Debug)]
pub struct JointTable {
    n2: usize,
    values1: Vec<Dyadic>,
    values2: Vec<Dyadic>,
    // viable[a * |values2| + b][q1 * n2 + q2]
    viable: Vec<Vec<bool>>,
    succ: Vec<Vec<usize>>,
}

impl JointTable {
    pub fn new(u1: &NodeAutomaton, u2: &NodeAutomaton) -> Result<JointTable> {
        check_same_alphabet(u1, u2)?;
        let n2 = u2.states();
        let size = u1.states() * n2;
        let mut edges: Vec<Vec<(usize, Dyadic, Dyadic)>> = vec![Vec::new(); size];
        for q1 in 0..u1.states() {
            for q2 in 0..n2 {
                for c in 0..u1.class_count() {
                    let (r1, o1) = u1.step_class(q1, c);
                    let (r2, o2) = u2.step_class(q2, c);
                    edges[q1 * n2 + q2].push((r1 * n2 + r2, o1, o2));
                }
            }
        }
        let values1 = u1.output_values();
        let values2 = u2.output_values();
        let mut viable = Vec::with_capacity(values1.len() * values2.len());
        for &a in &values1 {
            for &b in &values2 {
                let filtered: Vec<Vec<(usize, ExtValue)>> = edges
                    .iter()
                    .map(|es| {
                        es.iter()
                            .filter(|&&(_, o1, o2)| o1 <= a && o2 <= b)
                            .map(|&(to, _, _)| (to, ExtValue::MinusInfinity))
                            .collect()
                    })
                    .collect();
                viable.push(viable_states(&filtered, |_| true));
            }
        }
        let succ = edges.iter().map(|es| es.iter().map(|&(to, _, _)| to).collect()).collect();
        Ok(JointTable { n2, values1, values2, viable, succ })
    }

    pub fn product_states(&self) -> usize {
        self.succ.len()
    }

    pub fn product_index(&self, q1: StateId, q2: StateId) -> usize {
        q1 * self.n2 + q2
    }

    pub fn product_successors(&self) -> &[Vec<usize>] {
        &self.succ
    }

    /// `min` over joint runs from product state `p` of
    /// `objective(max(fixed1, sup outputs1), max(fixed2, sup outputs2))`.
    pub fn query(&self, p: usize, objective: Objective, fixed1: ExtValue, fixed2: ExtValue) -> ExtValue {
        let mut best = ExtValue::PlusInfinity;
        for (i, &a) in self.values1.iter().enumerate() {
            for (j, &b) in self.values2.iter().enumerate() {
                if self.viable[i * self.values2.len() + j][p] {
                    let v = objective.apply(fixed1.max(a.into()), fixed2.max(b.into()));
                    best = best.min(v);
                }
            }
        }
        best
    }
}

pub(crate) fn check_same_alphabet(u1: &NodeAutomaton, u2: &NodeAutomaton) -> Result<()> {
    if u1.letters() != u2.letters() || u1.has_default() != u2.has_default() {
        return Err(crate::error::Error::Incompatible(format!(
            "machines declare different alphabets ({} letters{} vs {} letters{})",
            u1.letters(),
            if u1.has_default() { " + default" } else { "" },
            u2.letters(),
            if u2.has_default() { " + default" } else { "" },
        )));
    }
    Ok(())
}

/// Node-infimum kernel for sums and maxima of two sup-of-outputs functions.
pub fn joint_minmax(
    u1: &NodeAutomaton,
    u2: &NodeAutomaton,
    objective: Objective,
    q1: StateId,
    q2: StateId,
    fixed1: ExtValue,
    fixed2: ExtValue,
) -> Result<ExtValue> {
    let table = JointTable::new(u1, u2)?;
    Ok(table.query(table.product_index(q1, q2), objective, fixed1, fixed2))
}

/// Eventual behaviour of `k ↦ min{ base[p] : p reachable in exactly k steps }`.
///
/// The sequence is non-increasing whenever `base` is a min-max value table,
/// so it is constant from `stable_at` on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailInfo {
    pub values: Vec<ExtValue>,
    pub inf: ExtValue,
    pub stable_at: usize,
}

impl TailInfo {
    pub fn at(&self, k: usize) -> ExtValue {
        if k < self.values.len() { self.values[k] } else { self.inf }
    }
}

/// Iterates reachable sets from each start state until a set repeats. Returns
/// the offending start state when the cap is exceeded.
pub fn tail_infima(succ: &[Vec<usize>], base: &[ExtValue], cap: usize) -> std::result::Result<Vec<TailInfo>, usize> {
    let n = succ.len();
    let words = n.div_ceil(64).max(1);
    let mut out = Vec::with_capacity(n);
    for start in 0..n {
        let mut set = vec![0u64; words];
        set[start / 64] |= 1 << (start % 64);
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut values = Vec::new();
        loop {
            if seen.contains_key(&set) {
                break;
            }
            if values.len() >= cap {
                return Err(start);
            }
            seen.insert(set.clone(), values.len());
            let v = (0..n)
                .filter(|&p| set[p / 64] >> (p % 64) & 1 == 1)
                .map(|p| base[p])
                .min()
                .unwrap_or(ExtValue::PlusInfinity);
            values.push(v);
            let mut next = vec![0u64; words];
            for p in (0..n).filter(|&p| set[p / 64] >> (p % 64) & 1 == 1) {
                for &r in &succ[p] {
                    next[r / 64] |= 1 << (r % 64);
                }
            }
            set = next;
        }
        let inf = *values.iter().min().expect("at least one set");
        let stable_at = values.iter().position(|&v| v == inf).expect("attained");
        values.truncate(stable_at + 1);
        out.push(TailInfo { values, inf, stable_at });
    }
    Ok(out)
}

/// Default cap on reachable-set iterations: `2^states`, clamped.
pub fn stabilization_cap(states: usize) -> usize {
    if states >= 20 { 1 << 20 } else { 1 << states }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(z: i128, n: u32) -> Dyadic {
        Dyadic::new(z, n)
    }

    #[test]
    fn minmax_examples() {
        let u = NodeAutomaton::letter_output(2);
        assert_eq!(minmax_value(&u, 0), ExtValue::Finite(Dyadic::ZERO));
        let c = NodeAutomaton::constant(Dyadic::ONE, 2);
        assert_eq!(minmax_value(&c, 0), ExtValue::Finite(Dyadic::ONE));
        // state 0 --(1)--> state 1 on either letter; state 1 loops through
        // state 0 with output 1/2 on letter 0, or stays with output 1.
        let u = NodeAutomaton::from_fn(2, 2, |q, a| match (q, a) {
            (0, _) => (1, d(1, 2)),
            (1, 0) => (0, d(1, 1)),
            (1, _) => (1, Dyadic::ONE),
            _ => unreachable!(),
        })
        .unwrap();
        assert_eq!(minmax_value(&u, 0), ExtValue::Finite(d(1, 1)));
        assert_eq!(minmax_value(&u, 1), ExtValue::Finite(d(1, 1)));
    }

    #[test]
    fn dead_states_are_infinite() {
        let g = WeightedGraph { succ: vec![vec![(1, ExtValue::Finite(Dyadic::ZERO))], vec![]] };
        assert_eq!(minmax_all(&g), vec![ExtValue::PlusInfinity; 2]);
    }

    #[test]
    fn joint_examples() {
        let u1 = NodeAutomaton::letter_output(2);
        let u2 = NodeAutomaton::from_fn(1, 2, |_, a| (0, Dyadic::from_int(1 - a as i128))).unwrap();
        let none = ExtValue::MinusInfinity;
        let one = ExtValue::Finite(Dyadic::ONE);
        assert_eq!(joint_minmax(&u1, &u2, Objective::Sum, 0, 0, none, none).unwrap(), one);
        assert_eq!(joint_minmax(&u1, &u2, Objective::Max, 0, 0, none, none).unwrap(), one);
        let zero = NodeAutomaton::constant(Dyadic::ZERO, 2);
        assert_eq!(
            joint_minmax(&u1, &zero, Objective::Sum, 0, 0, none, none).unwrap(),
            minmax_value(&u1, 0)
        );
        // fixed parts dominate
        let two = ExtValue::Finite(Dyadic::from_int(2));
        assert_eq!(joint_minmax(&u1, &u2, Objective::Sum, 0, 0, two, none).unwrap(), ExtValue::Finite(Dyadic::from_int(2)));
    }

    #[test]
    fn joint_rejects_mismatched_alphabets() {
        let u1 = NodeAutomaton::letter_output(2);
        let u2 = NodeAutomaton::letter_output(3);
        assert!(JointTable::new(&u1, &u2).is_err());
    }

    #[test]
    fn tail_sequence_stabilizes() {
        // 0 -> {1, 2}, 1 -> 1, 2 -> 2 ; base values 5, 3, 1
        let succ = vec![vec![1, 2], vec![1], vec![2]];
        let base: Vec<ExtValue> = [5, 3, 1].iter().map(|&v| ExtValue::Finite(Dyadic::from_int(v))).collect();
        let tails = tail_infima(&succ, &base, 16).unwrap();
        assert_eq!(tails[0].inf, ExtValue::Finite(Dyadic::ONE));
        assert_eq!(tails[0].stable_at, 1);
        assert_eq!(tails[0].at(0), ExtValue::Finite(Dyadic::from_int(5)));
        assert_eq!(tails[0].at(7), ExtValue::Finite(Dyadic::ONE));
        assert_eq!(tails[1].stable_at, 0);
        assert_eq!(tail_infima(&succ, &base, 1), Err(0));
    }
}
