use thiserror::Error;

use crate::tree::Prefix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("branch leaves the tree at prefix [{prefix}]")]
    BranchOutsideTree { prefix: Prefix },

    #[error("invalid branch: {0}")]
    InvalidBranch(String),

    #[error("stabilization cap {cap} exceeded at prefix [{prefix}]")]
    StabilizationCap { prefix: Prefix, cap: usize },

    #[error("empty level list")]
    EmptyLevels,

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("certificate mismatch: {0}")]
    Certificate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
