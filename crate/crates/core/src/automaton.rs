//! Finite-state node-labeling machines and exact limsup evaluation along
//! eventually periodic branches.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::tree::{EventuallyPeriodicBranch, FullTree, Letter, Prefix};

pub type StateId = usize;

/// A letter class: one of the explicitly declared letters `0..k`, or the
/// default class standing for every other letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LetterClass {
    Letter(Letter),
    Default,
}

/// A function `u : T → ℝ` on nodes of a tree.
pub trait NodeFunction: Send + Sync {
    fn value(&self, s: &Prefix) -> Result<Dyadic>;
}

/// A function on branches that can be evaluated exactly on eventually
/// periodic inputs.
pub trait BranchFunction: Send + Sync {
    fn eval_branch(&self, x: &EventuallyPeriodicBranch) -> Result<Dyadic>;
}

/// Deterministic machine whose transition outputs label tree nodes: `u(x_0..x_t)`
/// is the output of the transition that reads `x_t`.
///
/// The declared classes are the letters `0..letters`, plus the default class
/// when the machine carries default transitions. Without default transitions
/// the machine lives on the full `letters`-ary tree; with them, on the full
/// ℕ-branching tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeAutomaton {
    initial: StateId,
    letters: u64,
    has_default: bool,
    // table[state][class index]; class index `letters` is the default class
    table: Vec<Vec<(StateId, Dyadic)>>,
    root_value: Dyadic,
}

/// Transient and cycle outputs of a run along an eventually periodic branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoSummary {
    pub transient_outputs: Vec<Dyadic>,
    pub cycle_outputs: Vec<Dyadic>,
}

impl LassoSummary {
    pub fn limsup(&self) -> Dyadic {
        *self.cycle_outputs.iter().max().expect("cycle is nonempty")
    }

    pub fn liminf(&self) -> Dyadic {
        *self.cycle_outputs.iter().min().expect("cycle is nonempty")
    }

    pub fn start(&self) -> usize {
        self.transient_outputs.len()
    }

    pub fn period(&self) -> usize {
        self.cycle_outputs.len()
    }
}

/// One transition `(state, class) → (next, output)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: StateId,
    pub class: LetterClass,
    pub to: StateId,
    pub output: Dyadic,
}

impl NodeAutomaton {
    /// Validates determinism and totality over the declared classes.
    pub fn new(states: usize, initial: StateId, letters: u64, transitions: &[Transition]) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidAutomaton(m));
        if states == 0 {
            return bad("no states".into());
        }
        if initial >= states {
            return bad(format!("initial state {initial} out of range"));
        }
        let has_default = transitions.iter().any(|t| t.class == LetterClass::Default);
        if letters == 0 && !has_default {
            return bad("no letter classes declared".into());
        }
        let width = letters as usize + usize::from(has_default);
        let mut table: Vec<Vec<Option<(StateId, Dyadic)>>> = vec![vec![None; width]; states];
        for t in transitions {
            if t.from >= states || t.to >= states {
                return bad(format!("transition {t:?} references a missing state"));
            }
            let c = match t.class {
                LetterClass::Letter(a) if a < letters => a as usize,
                LetterClass::Letter(a) => return bad(format!("letter {a} is not declared (letters = {letters})")),
                LetterClass::Default => letters as usize,
            };
            if table[t.from][c].replace((t.to, t.output)).is_some() {
                return bad(format!("duplicate transition from state {} on {:?}", t.from, t.class));
            }
        }
        let mut full = Vec::with_capacity(states);
        for (q, row) in table.into_iter().enumerate() {
            let mut out = Vec::with_capacity(width);
            for (c, cell) in row.into_iter().enumerate() {
                match cell {
                    Some(x) => out.push(x),
                    None => return bad(format!("missing transition from state {q} on class {c}")),
                }
            }
            full.push(out);
        }
        let root_value = full.iter().flatten().map(|&(_, o)| o).min().expect("nonempty");
        Ok(NodeAutomaton { initial, letters, has_default, table: full, root_value })
    }

    /// Builds a machine over the letters `0..letters` from a step function.
    pub fn from_fn(
        states: usize,
        letters: u64,
        step: impl Fn(StateId, Letter) -> (StateId, Dyadic),
    ) -> Result<Self> {
        let mut ts = Vec::new();
        for q in 0..states {
            for a in 0..letters {
                let (to, output) = step(q, a);
                ts.push(Transition { from: q, class: LetterClass::Letter(a), to, output });
            }
        }
        Self::new(states, 0, letters, &ts)
    }

    /// One state, every transition outputs `c`.
    pub fn constant(c: Dyadic, letters: u64) -> Self {
        Self::from_fn(1, letters, |_, _| (0, c)).expect("valid")
    }

    /// One state, output equals the letter read.
    pub fn letter_output(letters: u64) -> Self {
        Self::from_fn(1, letters, |_, a| (0, Dyadic::from_int(a as i128))).expect("valid")
    }

    pub fn states(&self) -> usize {
        self.table.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn letters(&self) -> u64 {
        self.letters
    }

    pub fn has_default(&self) -> bool {
        self.has_default
    }

    /// The tree this machine's function lives on.
    pub fn tree(&self) -> FullTree {
        if self.has_default {
            FullTree::NATURALS
        } else {
            FullTree::with_arity(self.letters)
        }
    }

    /// Class index for a letter, `None` if the letter is outside the declared alphabet.
    pub fn class_index(&self, a: Letter) -> Option<usize> {
        if a < self.letters {
            Some(a as usize)
        } else if self.has_default {
            Some(self.letters as usize)
        } else {
            None
        }
    }

    /// Number of live class indices.
    pub fn class_count(&self) -> usize {
        self.letters as usize + usize::from(self.has_default)
    }

    /// A letter belonging to class index `c`.
    pub fn class_representative(&self, c: usize) -> Letter {
        c as Letter
    }

    pub fn step_class(&self, q: StateId, c: usize) -> (StateId, Dyadic) {
        self.table[q][c]
    }

    pub fn step(&self, q: StateId, a: Letter) -> Option<(StateId, Dyadic)> {
        self.class_index(a).map(|c| self.table[q][c])
    }

    /// State after reading `s` from the initial state, with the outputs produced.
    pub fn run(&self, s: &[Letter]) -> Option<(StateId, Vec<Dyadic>)> {
        let mut q = self.initial;
        let mut outs = Vec::with_capacity(s.len());
        for &a in s {
            let (next, o) = self.step(q, a)?;
            outs.push(o);
            q = next;
        }
        Some((q, outs))
    }

    pub fn state_after(&self, s: &[Letter]) -> Option<StateId> {
        let mut q = self.initial;
        for &a in s {
            q = self.step(q, a)?.0;
        }
        Some(q)
    }

    /// `u(s)`; the root carries the least declared output.
    pub fn node_value(&self, s: &Prefix) -> Result<Dyadic> {
        if s.is_empty() {
            return Ok(self.root_value);
        }
        let mut q = self.initial;
        let mut last = self.root_value;
        for &a in s.letters() {
            let (next, o) = self.step(q, a).ok_or_else(|| Error::BranchOutsideTree { prefix: s.clone() })?;
            q = next;
            last = o;
        }
        Ok(last)
    }

    /// Distinct outputs, ascending.
    pub fn output_values(&self) -> Vec<Dyadic> {
        let mut v: Vec<Dyadic> = self.table.iter().flatten().map(|&(_, o)| o).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Largest exponent among the outputs.
    pub fn grid_exponent(&self) -> u32 {
        self.table.iter().flatten().map(|(_, o)| o.exponent()).max().unwrap_or(0)
    }

    /// The same machine with every output negated (represents `-u`).
    pub fn negated(&self) -> NodeAutomaton {
        let table: Vec<Vec<(StateId, Dyadic)>> =
            self.table.iter().map(|row| row.iter().map(|&(q, o)| (q, -o)).collect()).collect();
        let root_value = table.iter().flatten().map(|&(_, o)| o).min().expect("nonempty");
        NodeAutomaton { table, root_value, ..self.clone() }
    }

    pub fn transitions(&self) -> Vec<Transition> {
        let mut ts = Vec::new();
        for (q, row) in self.table.iter().enumerate() {
            for (c, &(to, output)) in row.iter().enumerate() {
                let class = if c < self.letters as usize {
                    LetterClass::Letter(c as Letter)
                } else {
                    LetterClass::Default
                };
                ts.push(Transition { from: q, class, to, output });
            }
        }
        ts
    }

    /// Exact `limsup_t u(x_0..x_t)` together with the lasso it was read from.
    pub fn eval_limsup(&self, x: &EventuallyPeriodicBranch) -> Result<(Dyadic, LassoSummary)> {
        let summary = self.lasso(x)?;
        Ok((summary.limsup(), summary))
    }

    /// Runs along `x` until `(state, position in cycle)` repeats.
    pub fn lasso(&self, x: &EventuallyPeriodicBranch) -> Result<LassoSummary> {
        let mut q = self.initial;
        let mut outputs = Vec::new();
        let mut prefix = Prefix::empty();
        let mut advance = |q: &mut StateId, t: usize, outputs: &mut Vec<Dyadic>| -> Result<()> {
            let a = x.letter_at(t);
            prefix.push(a);
            let (next, o) = self.step(*q, a).ok_or_else(|| Error::BranchOutsideTree { prefix: prefix.clone() })?;
            *q = next;
            outputs.push(o);
            Ok(())
        };
        let stem = x.stem().len();
        for t in 0..stem {
            advance(&mut q, t, &mut outputs)?;
        }
        let period = x.cycle().len();
        let mut seen: HashMap<(StateId, usize), usize> = HashMap::new();
        let mut t = stem;
        loop {
            let key = (q, (t - stem) % period);
            if let Some(&first) = seen.get(&key) {
                let cycle_outputs = outputs.split_off(first);
                return Ok(LassoSummary { transient_outputs: outputs, cycle_outputs });
            }
            seen.insert(key, t);
            advance(&mut q, t, &mut outputs)?;
            t += 1;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&AutomatonDoc::from(self)).expect("serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&AutomatonDoc::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: AutomatonDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }
}

/// `limsup_t u(x_0..x_t)`, exact.
pub fn eval_limsup(u: &NodeAutomaton, x: &EventuallyPeriodicBranch) -> Result<Dyadic> {
    u.eval_limsup(x).map(|(v, _)| v)
}

impl NodeFunction for NodeAutomaton {
    fn value(&self, s: &Prefix) -> Result<Dyadic> {
        self.node_value(s)
    }
}

impl BranchFunction for NodeAutomaton {
    fn eval_branch(&self, x: &EventuallyPeriodicBranch) -> Result<Dyadic> {
        eval_limsup(self, x)
    }
}

/// Wire form: `{"states": n, "initial": 0, "letters": k, "transitions": [[q, a|"default", q', "z/2^n"], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub states: usize,
    pub initial: StateId,
    pub letters: u64,
    pub transitions: Vec<(StateId, ClassRef, StateId, Dyadic)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassRef {
    Letter(Letter),
    Named(String),
}

impl From<&NodeAutomaton> for AutomatonDoc {
    fn from(u: &NodeAutomaton) -> Self {
        let transitions = u
            .transitions()
            .into_iter()
            .map(|t| {
                let c = match t.class {
                    LetterClass::Letter(a) => ClassRef::Letter(a),
                    LetterClass::Default => ClassRef::Named("default".into()),
                };
                (t.from, c, t.to, t.output)
            })
            .collect();
        AutomatonDoc { states: u.states(), initial: u.initial, letters: u.letters, transitions }
    }
}

impl TryFrom<AutomatonDoc> for NodeAutomaton {
    type Error = Error;

    fn try_from(doc: AutomatonDoc) -> Result<Self> {
        let ts = doc
            .transitions
            .iter()
            .map(|(from, c, to, output)| {
                let class = match c {
                    ClassRef::Letter(a) => LetterClass::Letter(*a),
                    ClassRef::Named(n) if n == "default" => LetterClass::Default,
                    ClassRef::Named(n) => return Err(Error::Parse(format!("unknown letter class {n:?}"))),
                };
                Ok(Transition { from: *from, class, to: *to, output: *output })
            })
            .collect::<Result<Vec<_>>>()?;
        NodeAutomaton::new(doc.states, doc.initial, doc.letters, &ts)
    }
}
