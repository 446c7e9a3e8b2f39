use std::sync::Arc;

use crate::dyadic::{Dyadic, MAX_EXPONENT};
use crate::game::{IIMove, StateDescriptor, StrategyFault, StrategyI};
use crate::tree::Letter;

/// `x_0 = 0`, `x_{n+1} = v_n`.
#[derive(Clone, Debug, Default)]
pub struct Copycat {
    started: bool,
}

pub fn copycat_strategy() -> Copycat {
    Copycat::default()
}

impl StrategyI for Copycat {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        self.started = true;
        match prev {
            None => Ok(0),
            Some(IIMove::Single(v)) => {
                v.to_natural().ok_or_else(|| StrategyFault(format!("value {v} is not a natural number")))
            }
            Some(IIMove::Pair(..)) => Err(StrategyFault("copycat expects single values".into())),
        }
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Finite(vec![self.started as i128])
    }
}

/// Default number of enumeration entries searched per round.
pub const SPIRAL_CAP: usize = 1 << 16;

/// An enumeration of all dyadic rationals: block `N` lists `z/2^j` in lowest
/// terms with `|z| + j = N`, by increasing `j`, positive before negative.
/// Exponents stop at [`MAX_EXPONENT`].
#[derive(Clone, Debug)]
pub struct DyadicSpiral {
    points: Vec<Dyadic>,
}

impl DyadicSpiral {
    pub fn new(len: usize) -> DyadicSpiral {
        let mut points = Vec::with_capacity(len);
        let mut block: i128 = 0;
        'outer: loop {
            for j in 0..=block.min(MAX_EXPONENT as i128) {
                let m = block - j;
                let zs: &[i128] = if m == 0 { &[0] } else { &[m, -m] };
                for &z in zs {
                    if j == 0 || z % 2 != 0 {
                        if points.len() == len {
                            break 'outer;
                        }
                        points.push(Dyadic::new(z, j as u32));
                    }
                }
            }
            block += 1;
        }
        DyadicSpiral { points }
    }

    pub fn get(&self, idx: usize) -> Option<Dyadic> {
        self.points.get(idx).copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Least index `i` with `|v - q(i)| ≤ 2^-n`.
    pub fn least_within(&self, v: Dyadic, n: u64) -> Option<usize> {
        self.points.iter().position(|&q| (v - q).abs().cmp_pow2_neg(n) != std::cmp::Ordering::Greater)
    }
}

/// `x_0 = 0`, `x_{n+1}` = least index with `|v_n - q(x_{n+1})| ≤ 2^-n`.
#[derive(Clone, Debug)]
pub struct ApproxCopycat {
    q: Arc<DyadicSpiral>,
    round: u64,
}

pub fn approx_copycat(q: Arc<DyadicSpiral>) -> ApproxCopycat {
    ApproxCopycat { q, round: 0 }
}

impl ApproxCopycat {
    pub fn enumeration(&self) -> &DyadicSpiral {
        &self.q
    }
}

impl StrategyI for ApproxCopycat {
    fn next_letter(&mut self, prev: Option<&IIMove>) -> Result<Letter, StrategyFault> {
        let letter = match prev {
            None => 0,
            Some(IIMove::Single(v)) => {
                let n = self.round - 1;
                self.q.least_within(*v, n).ok_or_else(|| {
                    StrategyFault(format!("no index below {} within 2^-{n} of v_{n} = {v}", self.q.len()))
                })? as Letter
            }
            Some(IIMove::Pair(..)) => return Err(StrategyFault("approximate copycat expects single values".into())),
        };
        self.round += 1;
        Ok(letter)
    }

    fn descriptor(&self) -> StateDescriptor {
        StateDescriptor::Unbounded
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play, GameKind};
    use crate::strategies::FsmStrategyII;
    use crate::tree::FullTree;

    #[test]
    fn copycat_follows_values() {
        let n = |k: i128| IIMove::Single(Dyadic::from_int(k));
        // alternates 2, 5 regardless of the letters read
        let table = vec![vec![(1, n(2)); 3], vec![(0, n(5)); 3]];
        let mut ii = FsmStrategyII::new(2, table, 0).unwrap();
        let trace = play(&GameKind::Gamma, &FullTree::NATURALS, &mut copycat_strategy(), &mut ii, 6);
        assert_eq!(trace.letters(), vec![0, 2, 5, 2, 5, 2]);
        let l = trace.lasso.unwrap();
        assert_eq!(l.period, 2);
    }

    #[test]
    fn spiral_prefix_and_search() {
        let q = DyadicSpiral::new(64);
        let first: Vec<String> = (0..6).map(|i| q.get(i).unwrap().to_string()).collect();
        assert_eq!(first, ["0/2^0", "1/2^0", "-1/2^0", "2/2^0", "-2/2^0", "1/2^1"]);
        let half = Dyadic::new(1, 1);
        let oracle = |n: u64| (0..q.len()).find(|&i| (half - q.get(i).unwrap()).abs().cmp_pow2_neg(n).is_le());
        for n in 0..6 {
            assert_eq!(q.least_within(half, n), oracle(n));
        }
        assert_eq!(q.least_within(half, 0), Some(0));
        assert_eq!(q.least_within(half, 1), Some(0));
        assert_eq!(q.least_within(half, 2), Some(5));
    }
}
