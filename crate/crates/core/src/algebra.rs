//! Sums, minima and maxima of limsup functions through the constructive chain:
//! level families of the two machines are combined pointwise, discretized,
//! and fed to the construction of `u`.

use serde::{Deserialize, Serialize};

use crate::automaton::NodeAutomaton;
use crate::construct::{verify_against, ConstructedU, ConstructionReport};
use crate::dyadic::{Dyadic, ExtValue};
use crate::error::{Error, Result};
use crate::family::{discretize, first_level_reaching, suffix_maxima, AutomatonFamily, Discretized, GridLscFamily};
use crate::minmax::{check_same_alphabet, stabilization_cap, tail_infima, JointTable, Objective, TailInfo};
use crate::tree::{EventuallyPeriodicBranch, FullTree, Prefix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraOp {
    Sum,
    Min,
    Max,
}

impl AlgebraOp {
    pub const ALL: [AlgebraOp; 3] = [AlgebraOp::Sum, AlgebraOp::Min, AlgebraOp::Max];

    pub fn apply(self, a: Dyadic, b: Dyadic) -> Dyadic {
        match self {
            AlgebraOp::Sum => a + b,
            AlgebraOp::Min => a.min(b),
            AlgebraOp::Max => a.max(b),
        }
    }
}

impl std::fmt::Display for AlgebraOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgebraOp::Sum => "sum",
            AlgebraOp::Min => "min",
            AlgebraOp::Max => "max",
        })
    }
}

impl std::str::FromStr for AlgebraOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(AlgebraOp::Sum),
            "min" => Ok(AlgebraOp::Min),
            "max" => Ok(AlgebraOp::Max),
            _ => Err(Error::Parse(format!("unknown operation {s:?} (expected sum, min or max)"))),
        }
    }
}

/// Levels `g_n^1 ⊕ g_n^2` for `⊕ ∈ {+, max}` where `g_n^i = sup_{t ≥ n} u_i`.
#[derive(Clone, Debug)]
pub struct JointFamily {
    u1: NodeAutomaton,
    u2: NodeAutomaton,
    objective: Objective,
    table: JointTable,
    tails: Vec<TailInfo>,
}

impl JointFamily {
    pub fn new(u1: &NodeAutomaton, u2: &NodeAutomaton, objective: Objective) -> Result<Self> {
        let table = JointTable::new(u1, u2)?;
        let base: Vec<ExtValue> = (0..table.product_states())
            .map(|p| table.query(p, objective, ExtValue::MinusInfinity, ExtValue::MinusInfinity))
            .collect();
        let cap = stabilization_cap(table.product_states());
        let tails = tail_infima(table.product_successors(), &base, cap)
            .map_err(|_| Error::StabilizationCap { prefix: Prefix::empty(), cap })?;
        Ok(JointFamily { u1: u1.clone(), u2: u2.clone(), objective, table, tails })
    }

    fn levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        let (Some((q1, o1)), Some((q2, o2))) = (self.u1.run(s.letters()), self.u2.run(s.letters())) else {
            return vec![ExtValue::PlusInfinity; upto + 1];
        };
        let p = self.table.product_index(q1, q2);
        let (f1, f2) = (suffix_maxima(&o1), suffix_maxima(&o2));
        (0..=upto)
            .map(|n| {
                if n <= s.len() {
                    self.table.query(p, self.objective, f1[n], f2[n])
                } else {
                    self.tails[p].at(n - s.len())
                }
            })
            .collect()
    }

    fn product_state(&self, s: &Prefix) -> Option<usize> {
        let q1 = self.u1.state_after(s.letters())?;
        let q2 = self.u2.state_after(s.letters())?;
        Some(self.table.product_index(q1, q2))
    }
}

impl GridLscFamily for JointFamily {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        self.levels(s, level)[level]
    }

    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        self.levels(s, upto)
    }

    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        Ok(self.product_state(s).map_or(ExtValue::PlusInfinity, |p| self.tails[p].inf))
    }

    fn grid_exponent(&self, _level: usize) -> u32 {
        self.u1.grid_exponent().max(self.u2.grid_exponent())
    }

    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        match self.product_state(s) {
            None => Ok(0),
            Some(p) => first_level_reaching(self, s, s.len() + self.tails[p].stable_at),
        }
    }

    fn tree(&self) -> FullTree {
        self.u1.tree()
    }
}

/// Levels `min(g_n^1, g_n^2)`: cylinder infima of a pointwise minimum are the
/// minima of the cylinder infima.
#[derive(Clone, Debug)]
pub struct MinFamily {
    a: AutomatonFamily,
    b: AutomatonFamily,
}

impl MinFamily {
    pub fn new(u1: &NodeAutomaton, u2: &NodeAutomaton) -> Result<Self> {
        check_same_alphabet(u1, u2)?;
        Ok(MinFamily { a: AutomatonFamily::new(u1.clone())?, b: AutomatonFamily::new(u2.clone())? })
    }
}

impl GridLscFamily for MinFamily {
    fn node_inf(&self, level: usize, s: &Prefix) -> ExtValue {
        self.a.node_inf(level, s).min(self.b.node_inf(level, s))
    }

    fn node_inf_levels(&self, s: &Prefix, upto: usize) -> Vec<ExtValue> {
        let a = self.a.node_inf_levels(s, upto);
        let b = self.b.node_inf_levels(s, upto);
        a.into_iter().zip(b).map(|(x, y)| x.min(y)).collect()
    }

    fn inf_all(&self, s: &Prefix) -> Result<ExtValue> {
        Ok(self.a.inf_all(s)?.min(self.b.inf_all(s)?))
    }

    fn grid_exponent(&self, level: usize) -> u32 {
        self.a.grid_exponent(level).max(self.b.grid_exponent(level))
    }

    fn stabilization_index(&self, s: &Prefix) -> Result<usize> {
        let bound = self.a.stabilization_index(s)?.max(self.b.stabilization_index(s)?);
        first_level_reaching(self, s, bound)
    }

    fn tree(&self) -> FullTree {
        self.a.tree()
    }
}

pub type AlgebraU = ConstructedU<Discretized<Box<dyn GridLscFamily>>>;

/// The level family for `op(f1, f2)`, before discretization.
pub fn algebra_family(u1: &NodeAutomaton, u2: &NodeAutomaton, op: AlgebraOp) -> Result<Box<dyn GridLscFamily>> {
    Ok(match op {
        AlgebraOp::Sum => Box::new(JointFamily::new(u1, u2, Objective::Sum)?),
        AlgebraOp::Max => Box::new(JointFamily::new(u1, u2, Objective::Max)?),
        AlgebraOp::Min => Box::new(MinFamily::new(u1, u2)?),
    })
}

/// A node labeling whose limsup is `op(f1, f2)`.
pub fn algebra(u1: &NodeAutomaton, u2: &NodeAutomaton, op: AlgebraOp) -> Result<AlgebraU> {
    Ok(ConstructedU::new(discretize(algebra_family(u1, u2, op)?)))
}

/// Checks `limsup u' = op(f1, f2)` branch by branch.
pub fn verify_algebra(
    constructed: &AlgebraU,
    u1: &NodeAutomaton,
    u2: &NodeAutomaton,
    op: AlgebraOp,
    branches: &[EventuallyPeriodicBranch],
) -> Result<ConstructionReport> {
    verify_against(
        constructed,
        &[u1, u2],
        |x| Ok(op.apply(crate::automaton::eval_limsup(u1, x)?, crate::automaton::eval_limsup(u2, x)?)),
        branches,
    )
}
