use std::sync::Arc;

use crate::automaton::BranchFunction;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::game::{IIMove, StateDescriptor, StrategyFault, StrategyI, StrategyReport};
use crate::strategies::EventuallyZeroIndicator;
use crate::tree::{EventuallyPeriodicBranch, FullTree, Letter, Prefix, TreeSpec};

/// A closed set `C` on which the oscillation of `f` is at least `5ε`, with
/// near-optimal picks inside every cylinder.
pub trait OscillationInstance: Send + Sync {
    fn tree(&self) -> FullTree;

    fn closed_member(&self, s: &Prefix) -> bool;

    /// `sup{ f(x) : x ∈ O(s) ∩ C }`.
    fn sup_f(&self, s: &Prefix) -> Dyadic;

    /// `inf{ f(x) : x ∈ O(s) ∩ C }`.
    fn inf_f(&self, s: &Prefix) -> Dyadic;

    /// A point of `O(s) ∩ C` with `f > sup_f(s) - ε`.
    fn pick_high(&self, s: &Prefix) -> Result<EventuallyPeriodicBranch>;

    /// A point of `O(s) ∩ C` with `f < inf_f(s) + ε`.
    fn pick_low(&self, s: &Prefix) -> Result<EventuallyPeriodicBranch>;

    fn epsilon(&self) -> Dyadic;

    fn f(&self) -> &dyn BranchFunction;

    /// Whether picks continue past `s` in a way that does not depend on `s`,
    /// with `f`-values, `sup_f` and `inf_f` independent of `s`.
    fn suffix_invariant(&self) -> bool;
}

/// The full binary tree with `f` = indicator of eventually-zero branches,
/// `ε = 1/8`, high picks `s⌢0^ω` and low picks `s⌢(01)^ω`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IndicatorOscillation;

pub fn indicator_oscillation_instance() -> IndicatorOscillation {
    IndicatorOscillation
}

impl OscillationInstance for IndicatorOscillation {
    fn tree(&self) -> FullTree {
        FullTree::BINARY
    }

    fn closed_member(&self, s: &Prefix) -> bool {
        FullTree::BINARY.contains(s)
    }

    fn sup_f(&self, _s: &Prefix) -> Dyadic {
        Dyadic::ONE
    }

    fn inf_f(&self, _s: &Prefix) -> Dyadic {
        Dyadic::ZERO
    }

    fn pick_high(&self, s: &Prefix) -> Result<EventuallyPeriodicBranch> {
        EventuallyPeriodicBranch::new(s.letters().to_vec(), vec![0])
    }

    fn pick_low(&self, s: &Prefix) -> Result<EventuallyPeriodicBranch> {
        EventuallyPeriodicBranch::new(s.letters().to_vec(), vec![0, 1])
    }

    fn epsilon(&self) -> Dyadic {
        Dyadic::new(1, 3)
    }

    fn f(&self) -> &dyn BranchFunction {
        &EventuallyZeroIndicator
    }

    fn suffix_invariant(&self) -> bool {
        true
    }
}

/// II's move at stage `n_{k+1}` that ended phase `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trigger {
    pub phase: usize,
    pub stage: usize,
    pub v: Dyadic,
    pub w: Dyadic,
    /// `f(x(k))` for the phase's target.
    pub target_f: Dyadic,
}

/// Player I in `Γ'(f)`: alternately aims at a high and a low point of the
/// current cylinder, switching as soon as II's watched value comes within
/// `ε` of the target's `f`-value.
pub struct OscillationStrategy {
    inst: Arc<dyn OscillationInstance>,
    prefix: Prefix,
    phase: usize,
    phase_start: usize,
    target: Option<(EventuallyPeriodicBranch, Dyadic)>,
    triggers: Vec<Trigger>,
    last_gap: Option<Dyadic>,
}

pub fn strategy_i_oscillation(inst: Arc<dyn OscillationInstance>) -> OscillationStrategy {
    OscillationStrategy {
        inst,
        prefix: Prefix::empty(),
        phase: 0,
        phase_start: 0,
        target: None,
        triggers: Vec::new(),
        last_gap: None,
    }
}

impl OscillationStrategy {
    pub fn triggers(&self) -> &[Trigger] {
        &self.triggers
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn emitted(&self) -> &Prefix {
        &self.prefix
    }

    fn retarget(&mut self) -> Result<(), StrategyFault> {
        let s = &self.prefix;
        let eps = self.inst.epsilon();
        let err = |what: String| StrategyFault(format!("phase {} at {s:?}: {what}", self.phase));
        let (x, ok) = if self.phase.is_multiple_of(2) {
            let alpha = self.inst.sup_f(s);
            let x = self.inst.pick_high(s).map_err(|e| err(e.to_string()))?;
            let fx = self.inst.f().eval_branch(&x).map_err(|e| err(e.to_string()))?;
            (x, (fx, alpha - eps < fx))
        } else {
            let beta = self.inst.inf_f(s);
            let x = self.inst.pick_low(s).map_err(|e| err(e.to_string()))?;
            let fx = self.inst.f().eval_branch(&x).map_err(|e| err(e.to_string()))?;
            (x, (fx, fx < beta + eps))
        };
        let (fx, near_optimal) = ok;
        if !near_optimal {
            return Err(err(format!("pick {x} is not ε-optimal")));
        }
        let deep = x.initial_segment(s.len() + 16);
        if !s.is_prefix_of(&deep) || !self.inst.closed_member(&deep) {
            return Err(err(format!("pick {x} leaves O(s) ∩ C")));
        }
        self.target = Some((x, fx));
        Ok(())
    }
}

impl StrategyI for OscillationStrategy {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        match prev {
            None if self.target.is_none() => self.retarget()?,
            Some(&IIMove::Pair(v, w)) if self.target.is_some() => {
                let stage = self.prefix.len() - 1;
                let target_f = self.target.as_ref().expect("target set").1;
                let watched = if self.phase.is_multiple_of(2) { v } else { w };
                let gap = (watched - target_f).abs();
                self.last_gap = Some(gap);
                if stage > self.phase_start && gap < self.inst.epsilon() {
                    self.triggers.push(Trigger { phase: self.phase, stage, v, w, target_f });
                    self.phase += 1;
                    self.phase_start = stage;
                    self.retarget()?;
                }
            }
            Some(IIMove::Single(_)) => return Err(StrategyFault("expected value pairs".into())),
            _ => return Err(StrategyFault("strategy state out of step with the game".into())),
        }
        let a = self.target.as_ref().expect("target set").0.letter_at(self.prefix.len());
        self.prefix.push(a);
        Ok(a)
    }

    fn descriptor(&self) -> StateDescriptor {
        let Some((target, fx)) = &self.target else {
            return StateDescriptor::Finite(vec![-1]);
        };
        if !self.inst.suffix_invariant() {
            return StateDescriptor::Unbounded;
        }
        // the next move examined is at stage `len - 1`
        let armed = self.prefix.len() > self.phase_start + 1;
        let mut d = vec![(self.phase % 2) as i128, armed as i128, fx.numerator(), fx.exponent() as i128];
        d.extend(target.suffix(self.prefix.len()).key());
        StateDescriptor::Finite(d)
    }

    fn report(&self) -> StrategyReport {
        StrategyReport { switches: self.phase as u64, gap: self.last_gap }
    }
}

/// `v_{n_{k+1}} ≥ w_{n_{k+2}} + ε` for every even `k` whose two following
/// triggers both occurred: `(k, holds)`.
pub fn per_switch_inequality(triggers: &[Trigger], eps: Dyadic) -> Vec<(usize, bool)> {
    triggers
        .windows(2)
        .filter(|w| w[0].phase % 2 == 0 && w[1].phase == w[0].phase + 1)
        .map(|w| (w[0].phase, w[0].v >= w[1].w + eps))
        .collect()
}
