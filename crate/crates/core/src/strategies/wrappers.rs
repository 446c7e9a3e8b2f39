use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::game::{IIMove, StateDescriptor, StrategyFault, StrategyI, StrategyReport, ValueSet};
use crate::tree::Letter;

/// A strategy for `Γ_R` played in `Γ`: every incoming value is replaced by a
/// nearest point of `R` before the wrapped strategy sees it.
#[derive(Clone, Debug)]
pub struct LiftedStrategy<S> {
    inner: S,
    r: ValueSet,
}

pub fn lift_strategy<S: StrategyI>(s_r: S, r: ValueSet) -> LiftedStrategy<S> {
    LiftedStrategy { inner: s_r, r }
}

impl<S> LiftedStrategy<S> {
    pub fn value_set(&self) -> &ValueSet {
        &self.r
    }

    /// `F_n(y)`: the same nearest point for every `n`.
    pub fn round_value(&self, y: Dyadic) -> Result<Dyadic, StrategyFault> {
        match self.r.near(y) {
            Some(p) if self.r.contains(p) => Ok(p),
            Some(p) => Err(StrategyFault(format!("near point {p} of {y} is not in R"))),
            None => Err(StrategyFault("R is empty".into())),
        }
    }
}

impl<S: StrategyI> StrategyI for LiftedStrategy<S> {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        let mapped = match prev {
            None => None,
            Some(IIMove::Single(v)) => Some(IIMove::Single(self.round_value(*v)?)),
            Some(IIMove::Pair(..)) => return Err(StrategyFault("lifting expects single values".into())),
        };
        self.inner.next_letter(mapped.as_ref())
    }

    fn descriptor(&self) -> StateDescriptor {
        self.inner.descriptor()
    }

    fn report(&self) -> StrategyReport {
        self.inner.report()
    }
}

/// A strictly increasing map `i` on a finite domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderMap {
    pairs: Vec<(Dyadic, Dyadic)>,
}

impl OrderMap {
    pub fn new(mut pairs: Vec<(Dyadic, Dyadic)>) -> Result<OrderMap> {
        pairs.sort();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0 || w[0].1 >= w[1].1) {
            return Err(Error::Incompatible("map is not strictly increasing".into()));
        }
        Ok(OrderMap { pairs })
    }

    pub fn from_fn(domain: impl IntoIterator<Item = Dyadic>, i: impl Fn(Dyadic) -> Dyadic) -> Result<OrderMap> {
        OrderMap::new(domain.into_iter().map(|d| (d, i(d))).collect())
    }

    pub fn identity(domain: impl IntoIterator<Item = Dyadic>) -> OrderMap {
        OrderMap::from_fn(domain, |d| d).expect("identity is increasing")
    }

    pub fn forward(&self, d: Dyadic) -> Option<Dyadic> {
        self.pairs.iter().find(|p| p.0 == d).map(|p| p.1)
    }

    pub fn inverse(&self, y: Dyadic) -> Option<Dyadic> {
        self.pairs.iter().find(|p| p.1 == y).map(|p| p.0)
    }

    pub fn image(&self) -> ValueSet {
        ValueSet::finite(self.pairs.iter().map(|p| p.1))
    }
}

/// `σ(.., v_n) = σ_0(.., i^{-1}(v_n))`.
#[derive(Clone, Debug)]
pub struct RelabeledStrategy<S> {
    inner: S,
    map: OrderMap,
}

pub fn relabel_strategy<S: StrategyI>(s0: S, map: OrderMap) -> RelabeledStrategy<S> {
    RelabeledStrategy { inner: s0, map }
}

impl<S: StrategyI> StrategyI for RelabeledStrategy<S> {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        let mapped = match prev {
            None => None,
            Some(IIMove::Single(v)) => Some(IIMove::Single(
                self.map.inverse(*v).ok_or_else(|| StrategyFault(format!("value {v} is not in the image of i")))?,
            )),
            Some(IIMove::Pair(..)) => return Err(StrategyFault("relabeling expects single values".into())),
        };
        self.inner.next_letter(mapped.as_ref())
    }

    fn descriptor(&self) -> StateDescriptor {
        self.inner.descriptor()
    }

    fn report(&self) -> StrategyReport {
        self.inner.report()
    }
}
