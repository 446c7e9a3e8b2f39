//! Concrete strategies for both players.

mod copycat;
mod meager;
mod oscillation;
mod wrappers;

use std::sync::Arc;

pub use copycat::{approx_copycat, copycat_strategy, ApproxCopycat, Copycat, DyadicSpiral, SPIRAL_CAP};
pub use meager::{
    eventually_zero_instance, check_eqn_ind, strategy_i_meager_dense, EventuallyZero, EventuallyZeroIndicator, MeagerDenseInstance,
    StageLog, SwitchLog, SwitchingStrategy,
};
pub use oscillation::{
    indicator_oscillation_instance, per_switch_inequality, strategy_i_oscillation, IndicatorOscillation,
    OscillationInstance, OscillationStrategy, Trigger,
};
pub use wrappers::{lift_strategy, relabel_strategy, LiftedStrategy, OrderMap, RelabeledStrategy};

use crate::automaton::{NodeAutomaton, NodeFunction, StateId};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::game::{IIMove, StateDescriptor, StrategyFault, StrategyI, StrategyII};
use crate::tree::{Letter, Prefix};

fn fault<T>(msg: impl Into<String>) -> Result<T, StrategyFault> {
    Err(StrategyFault(msg.into()))
}

#[derive(Clone, Debug)]
pub struct ConstantI(pub Letter);

impl StrategyI for ConstantI {
    fn next_letter(&mut self, _prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        Ok(self.0)
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Finite(Vec::new())
    }
}

#[derive(Clone, Debug)]
pub struct ConstantII(pub IIMove);

impl StrategyII for ConstantII {
    fn respond(&mut self, _letter: Letter) -> Result<IIMove, StrategyFault> {
        Ok(self.0)
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Finite(Vec::new())
    }
}

/// Moore machine for Player I. It reads II's moves through classes: the
/// position of the value in `values`, or `values.len()` for any other value.
/// In pair mode the class of `(v, w)` is `class(v) * (k + 1) + class(w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmStrategyI {
    values: Vec<Dyadic>,
    pairs: bool,
    outputs: Vec<Letter>,
    table: Vec<Vec<StateId>>,
    initial: StateId,
    state: StateId,
}

impl FsmStrategyI {
    pub fn new(values: Vec<Dyadic>, pairs: bool, outputs: Vec<Letter>, table: Vec<Vec<StateId>>, initial: StateId) -> Result<Self> {
        let classes = Self::class_count_for(values.len(), pairs);
        let states = outputs.len();
        let bad = |m: String| Err(Error::InvalidAutomaton(m));
        if states == 0 || table.len() != states || initial >= states {
            return bad(format!("{states} outputs, {} table rows, initial {initial}", table.len()));
        }
        if let Some(row) = table.iter().find(|r| r.len() != classes || r.iter().any(|&q| q >= states)) {
            return bad(format!("table row {row:?} does not map {classes} classes into {states} states"));
        }
        Ok(FsmStrategyI { values, pairs, outputs, table, initial, state: initial })
    }

    pub fn class_count_for(values: usize, pairs: bool) -> usize {
        if pairs { (values + 1) * (values + 1) } else { values + 1 }
    }

    pub fn states(&self) -> usize {
        self.outputs.len()
    }

    pub fn values(&self) -> &[Dyadic] {
        &self.values
    }

    pub fn outputs(&self) -> &[Letter] {
        &self.outputs
    }

    pub fn table(&self) -> &[Vec<StateId>] {
        &self.table
    }

    pub fn pairs(&self) -> bool {
        self.pairs
    }

    /// A fresh copy in the initial state.
    pub fn reset(&self) -> Self {
        FsmStrategyI { state: self.initial, ..self.clone() }
    }

    fn value_class(&self, v: Dyadic) -> usize {
        self.values.iter().position(|&x| x == v).unwrap_or(self.values.len())
    }
}

impl StrategyI for FsmStrategyI {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        if let Some(mv) = prev {
            let class = match (*mv, self.pairs) {
                (IIMove::Single(v), false) => self.value_class(v),
                (IIMove::Pair(v, w), true) => self.value_class(v) * (self.values.len() + 1) + self.value_class(w),
                _ => return fault("move shape does not match the machine's input mode"),
            };
            self.state = self.table[self.state][class];
        }
        Ok(self.outputs[self.state])
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Finite(vec![self.state as i128])
    }
}

/// Mealy machine for Player II over letter classes `0..letters` plus a
/// default class for every larger letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmStrategyII {
    letters: u64,
    table: Vec<Vec<(StateId, IIMove)>>,
    initial: StateId,
    state: StateId,
}

impl FsmStrategyII {
    pub fn new(letters: u64, table: Vec<Vec<(StateId, IIMove)>>, initial: StateId) -> Result<Self> {
        let states = table.len();
        let classes = letters as usize + 1;
        if states == 0 || initial >= states {
            return Err(Error::InvalidAutomaton(format!("{states} states, initial {initial}")));
        }
        if table.iter().any(|r| r.len() != classes || r.iter().any(|&(q, _)| q >= states)) {
            return Err(Error::InvalidAutomaton(format!("every row needs {classes} transitions into {states} states")));
        }
        Ok(FsmStrategyII { letters, table, initial, state: initial })
    }

    pub fn states(&self) -> usize {
        self.table.len()
    }

    pub fn reset(&self) -> Self {
        FsmStrategyII { state: self.initial, ..self.clone() }
    }

    pub fn table(&self) -> &[Vec<(StateId, IIMove)>] {
        &self.table
    }
}

impl StrategyII for FsmStrategyII {
    fn respond(&mut self, letter: Letter) -> Result<IIMove, StrategyFault> {
        let class = letter.min(self.letters) as usize;
        let (next, mv) = self.table[self.state][class];
        self.state = next;
        Ok(mv)
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Finite(vec![self.state as i128])
    }
}

/// Player II answering `u(x_0, .., x_t)`.
#[derive(Clone, Debug)]
pub struct FromU {
    u: Arc<NodeAutomaton>,
    state: StateId,
}

pub fn strategy_ii_from_u(u: &NodeAutomaton) -> FromU {
    FromU { state: u.initial(), u: Arc::new(u.clone()) }
}

impl StrategyII for FromU {
    fn respond(&mut self, letter: Letter) -> Result<IIMove, StrategyFault> {
        match self.u.step(self.state, letter) {
            Some((next, out)) => {
                self.state = next;
                Ok(IIMove::Single(out))
            }
            None => fault(format!("letter {letter} is outside the machine's alphabet")),
        }
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Finite(vec![self.state as i128])
    }
}

/// `u(s)` = the value a fresh copy of Player II's strategy answers after
/// reading the letters of `s`.
pub struct StrategyFunction<F> {
    factory: F,
}

pub fn u_from_strategy_ii<F, S>(factory: F) -> StrategyFunction<F>
where
    F: Fn() -> S + Send + Sync,
    S: StrategyII,
{
    StrategyFunction { factory }
}

impl<F, S> NodeFunction for StrategyFunction<F>
where
    F: Fn() -> S + Send + Sync,
    S: StrategyII,
{
    fn value(&self, s: &Prefix) -> Result<Dyadic> {
        let mut strategy = (self.factory)();
        let mut last = None;
        for &a in s.letters() {
            last = Some(strategy.respond(a).map_err(|e| Error::Oracle(e.0))?);
        }
        match last {
            None => Err(Error::Oracle("Player II has not moved at the empty prefix".into())),
            Some(IIMove::Single(v)) => Ok(v),
            Some(IIMove::Pair(..)) => Err(Error::Oracle("pair-valued strategy".into())),
        }
    }
}

/// `(v_t, w_t) = (σ_f(..), -σ_g(..))` for strategies in `Γ(f)` and `Γ(-f)`.
pub struct PairStrategy<A, B> {
    f: A,
    g: B,
}

pub fn pair_strategies<A: StrategyII, B: StrategyII>(sf: A, sg: B) -> PairStrategy<A, B> {
    PairStrategy { f: sf, g: sg }
}

impl<A: StrategyII, B: StrategyII> StrategyII for PairStrategy<A, B> {
    fn respond(&mut self, letter: Letter) -> Result<IIMove, StrategyFault> {
        match (self.f.respond(letter)?, self.g.respond(letter)?) {
            (IIMove::Single(v), IIMove::Single(w)) => Ok(IIMove::Pair(v, -w)),
            _ => fault("paired strategies must be single-valued"),
        }
    }

    fn descriptor(&self) -> StateDescriptor {
        match (self.f.descriptor(), self.g.descriptor()) {
            (StateDescriptor::Finite(a), StateDescriptor::Finite(b)) => {
                let mut d = Vec::with_capacity(a.len() + b.len() + 1);
                d.push(a.len() as i128);
                d.extend(a);
                d.extend(b);
                StateDescriptor::Finite(d)
            }
            _ => StateDescriptor::Unbounded,
        }
    }
}
