use std::cmp::Ordering;
use std::sync::Arc;

use crate::automaton::BranchFunction;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::game::{IIMove, StateDescriptor, StrategyFault, StrategyI, StrategyReport};
use crate::tree::{EventuallyPeriodicBranch, FullTree, Letter, Prefix, TreeSpec};

/// A Cantor set `C`, a level `r` with `Y = C ∩ {f ≥ r}` meager and dense in
/// `C`, and a cover of `Y` by closed nowhere dense sets `S_0, S_1, ..`.
pub trait MeagerDenseInstance: Send + Sync {
    fn tree(&self) -> FullTree;

    fn cantor_member(&self, s: &Prefix) -> bool;

    /// Whether `O(s) ∩ S_m = ∅`.
    fn s_disjoint(&self, s: &Prefix, m: usize) -> bool;

    /// A point of `(O(s) ∩ Y) \ S_m`.
    fn pick_y(&self, s: &Prefix, m: usize) -> Result<EventuallyPeriodicBranch>;

    fn level_r(&self) -> Dyadic;

    fn f(&self) -> &dyn BranchFunction;

    /// A finite summary of `s` that, together with `m` and the remaining
    /// target, determines every later disjointness test and pick. `None` if
    /// the instance cannot provide one.
    fn stall_key(&self, s: &Prefix, m: usize) -> Option<Vec<i128>>;
}

/// `f` = indicator of the eventually-zero branches of the binary tree.
#[derive(Clone, Copy, Debug, Default)]
pub struct EventuallyZeroIndicator;

impl BranchFunction for EventuallyZeroIndicator {
    fn eval_branch(&self, x: &EventuallyPeriodicBranch) -> Result<Dyadic> {
        Ok(if x.canonical().cycle() == [0] { Dyadic::ONE } else { Dyadic::ZERO })
    }
}

/// Full binary tree, `Y` = eventually-zero branches, `S_m` = branches that
/// are zero beyond depth `m`, `r = 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EventuallyZero;

pub fn eventually_zero_instance() -> EventuallyZero {
    EventuallyZero
}

impl MeagerDenseInstance for EventuallyZero {
    fn tree(&self) -> FullTree {
        FullTree::BINARY
    }

    fn cantor_member(&self, s: &Prefix) -> bool {
        FullTree::BINARY.contains(s)
    }

    fn s_disjoint(&self, s: &Prefix, m: usize) -> bool {
        s.letters().iter().enumerate().any(|(depth, &a)| depth > m && a == 1)
    }

    fn pick_y(&self, s: &Prefix, m: usize) -> Result<EventuallyPeriodicBranch> {
        let depth = s.len().max(m + 1);
        let mut stem = s.letters().to_vec();
        stem.resize(depth, 0);
        stem.push(1);
        EventuallyPeriodicBranch::new(stem, vec![0])
    }

    fn level_r(&self) -> Dyadic {
        Dyadic::ONE
    }

    fn f(&self) -> &dyn BranchFunction {
        &EventuallyZeroIndicator
    }

    fn stall_key(&self, s: &Prefix, m: usize) -> Option<Vec<i128>> {
        Some(vec![s.len().min(m + 2) as i128, self.s_disjoint(s, m) as i128])
    }
}

/// State after stage `n`: the target `y(n)` and `m_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLog {
    pub stage: usize,
    pub m: usize,
    pub target: EventuallyPeriodicBranch,
}

/// A Case-1 retargeting decided after II's move at `stage`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchLog {
    pub stage: usize,
    pub prefix: Prefix,
    pub previous_m: usize,
    pub value: Dyadic,
    pub new_target: EventuallyPeriodicBranch,
}

/// Player I in `Γ(f)` zooming in on points of `Y` and switching away from
/// `S_m` whenever II's value exceeds `r - 2^-m` at a node that already
/// excludes `S_m`.
pub struct SwitchingStrategy {
    inst: Arc<dyn MeagerDenseInstance>,
    prefix: Prefix,
    target: Option<EventuallyPeriodicBranch>,
    m: usize,
    stages: Vec<StageLog>,
    switches: Vec<SwitchLog>,
}

pub fn strategy_i_meager_dense(inst: Arc<dyn MeagerDenseInstance>) -> SwitchingStrategy {
    SwitchingStrategy { inst, prefix: Prefix::empty(), target: None, m: 0, stages: Vec::new(), switches: Vec::new() }
}

/// Depth past the switching node to which a new target is checked against `S_m`.
const PICK_CHECK_DEPTH: usize = 16;

impl SwitchingStrategy {
    pub fn stages(&self) -> &[StageLog] {
        &self.stages
    }

    pub fn switches(&self) -> &[SwitchLog] {
        &self.switches
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn emitted(&self) -> &Prefix {
        &self.prefix
    }

    fn pick(&self, s: &Prefix, m: usize) -> Result<EventuallyPeriodicBranch, StrategyFault> {
        let y = self.inst.pick_y(s, m).map_err(|e| StrategyFault(format!("pick_y({s:?}, {m}): {e}")))?;
        let deep = y.initial_segment(s.len() + PICK_CHECK_DEPTH);
        let contract = |ok: bool, what: &str| {
            if ok { Ok(()) } else { Err(StrategyFault(format!("pick_y({s:?}, {m}) = {y}: {what}"))) }
        };
        contract(s.is_prefix_of(&deep), "does not extend s")?;
        contract(self.inst.cantor_member(&deep), "leaves C")?;
        contract(self.inst.s_disjoint(&deep, m), "does not avoid S_m")?;
        let fy = self.inst.f().eval_branch(&y).map_err(|e| StrategyFault(e.to_string()))?;
        contract(fy >= self.inst.level_r(), "f(y) < r")?;
        Ok(y)
    }

    /// `v > r - 2^-m`.
    fn exceeds(&self, v: Dyadic) -> bool {
        match self.inst.level_r().checked_sub(v) {
            Some(gap) => gap.cmp_pow2_neg(self.m as u64) == Ordering::Less,
            None => v > self.inst.level_r(),
        }
    }
}

impl StrategyI for SwitchingStrategy {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        match (prev, &self.target) {
            (None, None) => {
                self.target = Some(self.pick(&Prefix::empty(), 0)?);
            }
            (Some(IIMove::Single(v)), Some(_)) => {
                let stage = self.prefix.len() - 1;
                if self.exceeds(*v) && self.inst.s_disjoint(&self.prefix, self.m) {
                    let new_target = self.pick(&self.prefix, self.m + 1)?;
                    self.switches.push(SwitchLog {
                        stage,
                        prefix: self.prefix.clone(),
                        previous_m: self.m,
                        value: *v,
                        new_target: new_target.clone(),
                    });
                    self.m += 1;
                    self.target = Some(new_target);
                }
            }
            (Some(IIMove::Pair(..)), _) => return Err(StrategyFault("expected single values".into())),
            _ => return Err(StrategyFault("strategy state out of step with the game".into())),
        }
        let target = self.target.as_ref().expect("target set");
        let a = target.letter_at(self.prefix.len());
        self.prefix.push(a);
        self.stages.push(StageLog { stage: self.prefix.len() - 1, m: self.m, target: target.clone() });
        Ok(a)
    }

    fn descriptor(&self) -> StateDescriptor {
        let Some(target) = &self.target else {
            return StateDescriptor::Finite(vec![-1]);
        };
        match self.inst.stall_key(&self.prefix, self.m) {
            Some(key) => {
                let mut d = vec![self.m as i128, key.len() as i128];
                d.extend(key);
                d.extend(target.suffix(self.prefix.len()).key());
                StateDescriptor::Finite(d)
            }
            None => StateDescriptor::Unbounded,
        }
    }

    fn report(&self) -> StrategyReport {
        StrategyReport { switches: self.switches.len() as u64, gap: None }
    }
}

/// Checks `(x_0, .., x_n) = (y(n)_0, .., y(n)_n)` at every logged stage.
pub fn check_eqn_ind(strategy: &SwitchingStrategy) -> Result<()> {
    for log in strategy.stages() {
        let want = log.target.initial_segment(log.stage + 1);
        let got = strategy.emitted().truncate(log.stage + 1);
        if want != got {
            return Err(Error::Certificate(format!("stage {}: emitted {got:?}, target prefix {want:?}", log.stage)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play, GameKind};
    use crate::strategies::ConstantII;

    fn p(v: &[u64]) -> Prefix {
        Prefix::new(v.to_vec())
    }

    #[test]
    fn instance_primitives() {
        let inst = eventually_zero_instance();
        assert!(inst.s_disjoint(&p(&[0, 0, 1]), 1));
        assert!(!inst.s_disjoint(&p(&[0, 1]), 1));
        let y = inst.pick_y(&p(&[]), 0).unwrap();
        assert_eq!(y.initial_segment(4), p(&[0, 1, 0, 0]));
        assert_eq!(inst.f().eval_branch(&y).unwrap(), Dyadic::ONE);
        let y = inst.pick_y(&p(&[1, 1, 1]), 1).unwrap();
        assert_eq!(y.initial_segment(5), p(&[1, 1, 1, 1, 0]));
    }

    #[test]
    fn threshold_29_32() {
        let mut s = strategy_i_meager_dense(Arc::new(eventually_zero_instance()));
        let mut ii = ConstantII(IIMove::Single(Dyadic::new(29, 5)));
        let trace = play(&GameKind::Gamma, &FullTree::BINARY, &mut s, &mut ii, 200);
        let ms: Vec<usize> = s.switches().iter().map(|w| w.previous_m).collect();
        assert_eq!(ms, vec![0, 1, 2, 3]);
        assert_eq!(s.m(), 4);
        assert_eq!(&trace.letters()[..8], &[0, 1, 1, 1, 1, 1, 0, 0]);
        check_eqn_ind(&s).unwrap();
        assert!(trace.lasso.is_some());
    }
}
