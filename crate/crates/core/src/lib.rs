//! Exact evaluation, representation conversions and game simulation for
//! limsup-payoff games on pruned trees.

pub mod algebra;
pub mod automaton;
pub mod construct;
pub mod corpus;
pub mod dyadic;
pub mod error;
pub mod family;
pub mod game;
pub mod minmax;
pub mod strategies;
pub mod tree;

pub use automaton::{eval_limsup, BranchFunction, LassoSummary, LetterClass, NodeAutomaton, NodeFunction, StateId, Transition};
pub use construct::{construct_u, rn_sup, rstar_sup, verify_construction, ConstructedU, ConstructionReport};
pub use dyadic::{dyadic_ceil_to_grid, Dyadic, ExtValue};
pub use error::{Error, Result};
pub use family::{discretize, family_from_automaton, regularize_nonincreasing, GridLscFamily};
pub use minmax::{joint_minmax, minmax_value, Objective};
pub use tree::{branch_prefix, prefix_extend, EventuallyPeriodicBranch, FullTree, Letter, Prefix, TreeSpec};
pub use game::{
    exact_run, exact_verdict, play, play_until_lasso, GameKind, IIMove, Outcome, RunTrace, StateDescriptor, StrategyFault, StrategyI,
    StrategyII, ValueSet, Verdict,
};
pub use strategies::{
    approx_copycat, copycat_strategy, eventually_zero_instance, indicator_oscillation_instance, lift_strategy, pair_strategies,
    relabel_strategy, strategy_i_meager_dense, strategy_i_oscillation, strategy_ii_from_u, u_from_strategy_ii,
};
