//! Exact dyadic rationals `z / 2^n` and their extension by `±∞`.
//!
//! Every value manufactured by the constructions in this crate (automaton
//! outputs, grid ceilings, stage penalties `-length(s)`, copied moves) is a
//! dyadic rational, so equality and order are decidable and exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Largest exponent a [`Dyadic`] may carry; keeps alignment shifts inside `i128`.
pub const MAX_EXPONENT: u32 = 96;

/// A dyadic rational `numerator / 2^exponent` in normalized form: the numerator
/// is odd, or the exponent is zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: i128,
    exponent: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { numerator: 0, exponent: 0 };
    pub const ONE: Dyadic = Dyadic { numerator: 1, exponent: 0 };

    /// Builds `numerator / 2^exponent` and normalizes it.
    ///
    /// Panics if `exponent` exceeds [`MAX_EXPONENT`] after normalization.
    pub fn new(numerator: i128, exponent: u32) -> Dyadic {
        Self::try_new(numerator, exponent).expect("dyadic exponent out of range")
    }

    pub fn try_new(mut numerator: i128, mut exponent: u32) -> Option<Dyadic> {
        if numerator == 0 {
            return Some(Dyadic::ZERO);
        }
        let tz = numerator.trailing_zeros().min(exponent);
        numerator >>= tz;
        exponent -= tz;
        (exponent <= MAX_EXPONENT).then_some(Dyadic { numerator, exponent })
    }

    pub fn from_int(value: i128) -> Dyadic {
        Dyadic { numerator: value, exponent: 0 }
    }

    /// `2^-n`, when representable.
    pub fn pow2_neg(n: u32) -> Option<Dyadic> {
        Self::try_new(1, n)
    }

    pub fn numerator(&self) -> i128 {
        self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_integer(&self) -> bool {
        self.exponent == 0
    }

    /// The value as a natural number, if it is one.
    pub fn to_natural(&self) -> Option<u64> {
        if self.exponent == 0 && self.numerator >= 0 {
            u64::try_from(self.numerator).ok()
        } else {
            None
        }
    }

    pub fn abs(self) -> Dyadic {
        Dyadic { numerator: self.numerator.abs(), exponent: self.exponent }
    }

    pub fn checked_add(self, other: Dyadic) -> Option<Dyadic> {
        let e = self.exponent.max(other.exponent);
        let a = self.numerator.checked_mul(1i128 << (e - self.exponent))?;
        let b = other.numerator.checked_mul(1i128 << (e - other.exponent))?;
        Self::try_new(a.checked_add(b)?, e)
    }

    pub fn checked_sub(self, other: Dyadic) -> Option<Dyadic> {
        self.checked_add(-other)
    }

    /// Compares `self` against `2^-n` for an arbitrary `n`, without materializing `2^-n`.
    pub fn cmp_pow2_neg(&self, n: u64) -> Ordering {
        if self.numerator <= 0 {
            return Ordering::Less;
        }
        // self = z / 2^e with z > 0; compare z against 2^(e - n).
        let e = self.exponent as u64;
        if e < n {
            // 2^(e-n) < 1 <= z
            return Ordering::Greater;
        }
        let shift = e - n;
        if shift >= 127 {
            return Ordering::Less;
        }
        self.numerator.cmp(&(1i128 << shift))
    }

    /// The least `z * 2^-n` that is `>= self`.
    pub fn ceil_to_grid(self, n: u32) -> Dyadic {
        if self.exponent <= n {
            return self;
        }
        let shift = self.exponent - n;
        // floor division by 2^shift, then bump unless exact
        let q = self.numerator >> shift;
        let exact = (q << shift) == self.numerator;
        let z = if exact { q } else { q + 1 };
        Dyadic::new(z, n)
    }

    pub fn min(self, other: Dyadic) -> Dyadic {
        if self <= other { self } else { other }
    }

    pub fn max(self, other: Dyadic) -> Dyadic {
        if self >= other { self } else { other }
    }
}

/// Least `z * 2^-n` that is `>= value`.
pub fn dyadic_ceil_to_grid(value: Dyadic, n: u32) -> Dyadic {
    value.ceil_to_grid(n)
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = self.numerator.checked_mul(1i128 << (e - self.exponent));
        let b = other.numerator.checked_mul(1i128 << (e - other.exponent));
        match (a, b) {
            (Some(a), Some(b)) => a.cmp(&b),
            // Overflow only happens when magnitudes differ wildly; fall back to
            // the sign of the difference computed through the integer parts.
            _ => {
                let ia = self.numerator >> self.exponent;
                let ib = other.numerator >> other.exponent;
                ia.cmp(&ib).then_with(|| {
                    let fa = Dyadic::new(self.numerator - (ia << self.exponent), self.exponent);
                    let fb = Dyadic::new(other.numerator - (ib << other.exponent), other.exponent);
                    fa.cmp(&fb)
                })
            }
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        self.checked_add(rhs).expect("dyadic overflow")
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self.checked_sub(rhs).expect("dyadic overflow")
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { numerator: -self.numerator, exponent: self.exponent }
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v as i128)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `z/2^n` (normalized or not) and plain integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("malformed dyadic {s:?}, expected \"z/2^n\""));
        let s = s.trim();
        match s.split_once('/') {
            None => s.parse::<i128>().map(Dyadic::from_int).map_err(|_| bad()),
            Some((z, rest)) => {
                let n = rest.strip_prefix("2^").ok_or_else(bad)?;
                let z: i128 = z.trim().parse().map_err(|_| bad())?;
                let n: u32 = n.trim().parse().map_err(|_| bad())?;
                Dyadic::try_new(z, n).ok_or_else(bad)
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A dyadic value extended by both infinities. Infima over cylinders may be
/// unbounded below, so node-infimum oracles speak this type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtValue {
    MinusInfinity,
    Finite(Dyadic),
    PlusInfinity,
}

impl ExtValue {
    pub fn finite(self) -> Option<Dyadic> {
        match self {
            ExtValue::Finite(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    /// Grid ceiling; infinities are fixed points.
    pub fn ceil_to_grid(self, n: u32) -> ExtValue {
        match self {
            ExtValue::Finite(d) => ExtValue::Finite(d.ceil_to_grid(n)),
            other => other,
        }
    }

    /// Sum with the convention that `-∞` absorbs (the objectives here never
    /// combine opposite infinities).
    pub fn plus(self, other: ExtValue) -> ExtValue {
        use ExtValue::*;
        match (self, other) {
            (MinusInfinity, _) | (_, MinusInfinity) => MinusInfinity,
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl From<Dyadic> for ExtValue {
    fn from(d: Dyadic) -> Self {
        ExtValue::Finite(d)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::MinusInfinity => f.write_str("-inf"),
            ExtValue::Finite(d) => fmt::Display::fmt(d, f),
            ExtValue::PlusInfinity => f.write_str("+inf"),
        }
    }
}
