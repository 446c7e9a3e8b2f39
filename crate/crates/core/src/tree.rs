//! Letters, finite prefixes, pruned trees and eventually periodic branches.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elements of the countable alphabet `A` are natural numbers.
pub type Letter = u64;

/// A finite sequence of letters, i.e. a node of the tree.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prefix(Vec<Letter>);

impl Prefix {
    pub fn empty() -> Prefix {
        Prefix(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Prefix {
        Prefix(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// `s⌢a`.
    pub fn extend(&self, a: Letter) -> Prefix {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.extend_from_slice(&self.0);
        letters.push(a);
        Prefix(letters)
    }

    pub fn push(&mut self, a: Letter) {
        self.0.push(a);
    }

    /// Drops the last letter; `None` for the root.
    pub fn parent(&self) -> Option<Prefix> {
        if self.0.is_empty() {
            None
        } else {
            Some(Prefix(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The initial segment of length `len` (or the whole prefix if shorter).
    pub fn truncate(&self, len: usize) -> Prefix {
        Prefix(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Prefix) -> bool {
        other.0.starts_with(&self.0)
    }
}

/// `s⌢a`.
pub fn prefix_extend(s: &Prefix, a: Letter) -> Prefix {
    s.extend(a)
}

impl From<Vec<Letter>> for Prefix {
    fn from(v: Vec<Letter>) -> Self {
        Prefix(v)
    }
}

impl From<&[Letter]> for Prefix {
    fn from(v: &[Letter]) -> Self {
        Prefix(v.to_vec())
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for Prefix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_letters(s).map(Prefix)
    }
}

fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Letter>()
                .map_err(|_| Error::Parse(format!("bad letter {t:?} in {s:?}")))
        })
        .collect()
}

/// A pruned tree given by decidable membership.
pub trait TreeSpec: Send + Sync {
    fn contains(&self, s: &Prefix) -> bool;

    /// Some letter `a` with `s⌢a` in the tree. Only meaningful for members.
    fn child_witness(&self, s: &Prefix) -> Letter;

    /// Whether `s⌢a` is a member, given that `s` is.
    fn admits(&self, s: &Prefix, a: Letter) -> bool {
        self.contains(&s.extend(a))
    }

    /// Checks the prefixes of `x` up to one full extra period past the stem.
    /// Letter-local trees override this with an exact check.
    fn admits_branch(&self, x: &EventuallyPeriodicBranch) -> Result<()> {
        let horizon = x.stem().len() + 2 * x.cycle().len();
        let mut s = Prefix::empty();
        for t in 0..horizon {
            s.push(x.letter_at(t));
            if !self.contains(&s) {
                return Err(Error::BranchOutsideTree { prefix: s });
            }
        }
        Ok(())
    }
}

/// The full tree over `{0, .., arity-1}`, or over all of ℕ when `arity` is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FullTree {
    pub arity: Option<u64>,
}

impl FullTree {
    pub const BINARY: FullTree = FullTree { arity: Some(2) };
    pub const NATURALS: FullTree = FullTree { arity: None };

    pub fn with_arity(arity: u64) -> FullTree {
        assert!(arity > 0, "a pruned tree needs at least one letter");
        FullTree { arity: Some(arity) }
    }

    pub fn letter_ok(&self, a: Letter) -> bool {
        self.arity.is_none_or(|k| a < k)
    }
}

impl TreeSpec for FullTree {
    fn contains(&self, s: &Prefix) -> bool {
        s.letters().iter().all(|&a| self.letter_ok(a))
    }

    fn child_witness(&self, _s: &Prefix) -> Letter {
        0
    }

    fn admits(&self, _s: &Prefix, a: Letter) -> bool {
        self.letter_ok(a)
    }

    fn admits_branch(&self, x: &EventuallyPeriodicBranch) -> Result<()> {
        let mut s = Prefix::empty();
        for t in 0..x.stem().len() + x.cycle().len() {
            let a = x.letter_at(t);
            s.push(a);
            if !self.letter_ok(a) {
                return Err(Error::BranchOutsideTree { prefix: s });
            }
        }
        Ok(())
    }
}

/// An infinite branch `stem ⌢ cycle^ω`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventuallyPeriodicBranch {
    stem: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl EventuallyPeriodicBranch {
    pub fn new(stem: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidBranch("cycle must be nonempty".into()));
        }
        Ok(EventuallyPeriodicBranch { stem, cycle })
    }

    /// Builds the branch and rejects it if it leaves `tree`.
    pub fn new_in(tree: &dyn TreeSpec, stem: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        let x = Self::new(stem, cycle)?;
        tree.admits_branch(&x)?;
        Ok(x)
    }

    pub fn constant(a: Letter) -> Self {
        EventuallyPeriodicBranch { stem: Vec::new(), cycle: vec![a] }
    }

    pub fn stem(&self) -> &[Letter] {
        &self.stem
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    pub fn letter_at(&self, t: usize) -> Letter {
        if t < self.stem.len() {
            self.stem[t]
        } else {
            self.cycle[(t - self.stem.len()) % self.cycle.len()]
        }
    }

    /// `(x_0, .., x_t)`, of length `t + 1`.
    pub fn prefix(&self, t: usize) -> Prefix {
        Prefix((0..=t).map(|i| self.letter_at(i)).collect())
    }

    /// The first `len` letters.
    pub fn initial_segment(&self, len: usize) -> Prefix {
        Prefix((0..len).map(|i| self.letter_at(i)).collect())
    }

    /// The branch read from position `pos` onwards, in canonical form.
    pub fn suffix(&self, pos: usize) -> EventuallyPeriodicBranch {
        let (stem, cycle) = if pos < self.stem.len() {
            (self.stem[pos..].to_vec(), self.cycle.clone())
        } else {
            let k = (pos - self.stem.len()) % self.cycle.len();
            let mut c = self.cycle[k..].to_vec();
            c.extend_from_slice(&self.cycle[..k]);
            (Vec::new(), c)
        };
        EventuallyPeriodicBranch { stem, cycle }.canonical()
    }

    /// The unique shortest `(stem, cycle)` describing the same infinite word:
    /// primitive cycle, and no stem letter that could be folded into it.
    pub fn canonical(&self) -> EventuallyPeriodicBranch {
        let mut cycle = self.cycle.clone();
        let n = cycle.len();
        if let Some(p) = (1..=n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| cycle[i] == cycle[i - p])) {
            cycle.truncate(p);
        }
        let mut stem = self.stem.clone();
        while let Some(&last) = stem.last() {
            if last != *cycle.last().unwrap() {
                break;
            }
            stem.pop();
            cycle.rotate_right(1);
        }
        EventuallyPeriodicBranch { stem, cycle }
    }

    /// `s ⌢ tail` for a branch `tail`.
    pub fn prepend(s: &Prefix, tail: &EventuallyPeriodicBranch) -> EventuallyPeriodicBranch {
        let mut stem = s.letters().to_vec();
        stem.extend_from_slice(&tail.stem);
        EventuallyPeriodicBranch { stem, cycle: tail.cycle.clone() }
    }

    /// Flat integer encoding of the canonical form, used in state descriptors.
    pub fn key(&self) -> Vec<i128> {
        let c = self.canonical();
        let mut k = Vec::with_capacity(c.stem.len() + c.cycle.len() + 1);
        k.push(c.stem.len() as i128);
        k.extend(c.stem.iter().map(|&a| a as i128));
        k.extend(c.cycle.iter().map(|&a| a as i128));
        k
    }
}

/// `(x_0, .., x_t)`.
pub fn branch_prefix(x: &EventuallyPeriodicBranch, t: usize) -> Prefix {
    x.prefix(t)
}

impl fmt::Display for EventuallyPeriodicBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stem={};cycle={}", Prefix(self.stem.clone()), Prefix(self.cycle.clone()))
    }
}

impl fmt::Debug for EventuallyPeriodicBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for EventuallyPeriodicBranch {
    type Err = Error;

    /// Parses `stem=1,0;cycle=0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut stem = None;
        let mut cycle = None;
        for part in s.split(';') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad branch descriptor {s:?}")))?;
            match k.trim() {
                "stem" => stem = Some(parse_letters(v)?),
                "cycle" => cycle = Some(parse_letters(v)?),
                other => return Err(Error::Parse(format!("unknown branch field {other:?}"))),
            }
        }
        let cycle = cycle.ok_or_else(|| Error::Parse(format!("branch {s:?} has no cycle")))?;
        Self::new(stem.unwrap_or_default(), cycle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[Letter]) -> Prefix {
        Prefix::from(v)
    }

    #[test]
    fn extend_examples() {
        assert_eq!(prefix_extend(&Prefix::empty(), 0), p(&[0]));
        assert_eq!(prefix_extend(&p(&[0, 1]), 1), p(&[0, 1, 1]));
        assert_eq!(Prefix::empty().parent(), None);
    }

    #[test]
    fn branch_prefix_examples() {
        let x = EventuallyPeriodicBranch::new(vec![], vec![0]).unwrap();
        assert_eq!(branch_prefix(&x, 2), p(&[0, 0, 0]));
        let x = EventuallyPeriodicBranch::new(vec![1], vec![0, 1]).unwrap();
        assert_eq!(branch_prefix(&x, 4), p(&[1, 0, 1, 0, 1]));
        for t in 0..20 {
            assert!(x.prefix(t).is_prefix_of(&x.prefix(t + 1)));
        }
    }

    #[test]
    fn rejects_empty_cycle_and_foreign_letters() {
        assert!(EventuallyPeriodicBranch::new(vec![0], vec![]).is_err());
        let err = EventuallyPeriodicBranch::new_in(&FullTree::BINARY, vec![0, 2], vec![0]).unwrap_err();
        assert_eq!(err, Error::BranchOutsideTree { prefix: p(&[0, 2]) });
    }

    #[test]
    fn descriptor_parsing() {
        let x: EventuallyPeriodicBranch = "stem=;cycle=0,1".parse().unwrap();
        assert_eq!(x.stem(), &[] as &[Letter]);
        assert_eq!(x.cycle(), &[0, 1]);
        assert_eq!(x.to_string().parse::<EventuallyPeriodicBranch>().unwrap(), x);
        assert!("stem=1".parse::<EventuallyPeriodicBranch>().is_err());
        assert!("stem=1;cycle=".parse::<EventuallyPeriodicBranch>().is_err());
    }

    #[test]
    fn canonical_form() {
        let x = EventuallyPeriodicBranch::new(vec![1, 0, 1], vec![0, 1, 0, 1]).unwrap();
        let c = x.canonical();
        assert_eq!(c.stem(), &[] as &[Letter]);
        assert_eq!(c.cycle(), &[1, 0]);
        let y = EventuallyPeriodicBranch::new(vec![1, 1, 0, 1], vec![0, 1, 0, 1]).unwrap().canonical();
        assert_eq!((y.stem(), y.cycle()), (&[1u64][..], &[1u64, 0][..]));
        assert_eq!(x.suffix(1).stem(), &[] as &[Letter]);
        assert_eq!(x.suffix(1).cycle(), &[0, 1]);
        assert_eq!(x.suffix(4).cycle(), &[1, 0]);
    }

    proptest! {
        #[test]
        fn parent_inverts_extend(v in prop::collection::vec(0u64..5, 0..12), a in 0u64..5) {
            let s = Prefix::new(v);
            prop_assert_eq!(s.extend(a).parent(), Some(s.clone()));
            prop_assert_eq!(s.extend(a).len(), s.len() + 1);
        }

        #[test]
        fn canonical_and_suffix_preserve_letters(
            stem in prop::collection::vec(0u64..2, 0..5),
            cycle in prop::collection::vec(0u64..2, 1..5),
            pos in 0usize..8,
        ) {
            let x = EventuallyPeriodicBranch::new(stem, cycle).unwrap();
            let c = x.canonical();
            let s = x.suffix(pos);
            for t in 0..30 {
                prop_assert_eq!(c.letter_at(t), x.letter_at(t));
                prop_assert_eq!(s.letter_at(t), x.letter_at(pos + t));
            }
        }

        #[test]
        fn full_tree_is_pruned(v in prop::collection::vec(0u64..3, 0..20)) {
            let tree = FullTree::with_arity(3);
            let s = Prefix::new(v);
            prop_assert!(tree.contains(&s));
            let a = tree.child_witness(&s);
            prop_assert!(tree.contains(&s.extend(a)));
        }
    }
}
