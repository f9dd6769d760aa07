//! Stackelberg commitments on alternating-move game trees.
//!
//! The crate is `no_std` (it needs `alloc`). It holds the game model, the
//! points-and-segments frontier solver, brute-force oracles for small trees,
//! and the one-lane bridge game that the solver drives. File formats, the CLI
//! and the network server live in the `stackel` crate.
//!
//! Money is integer cents. Every computed value is an exact rational, so
//! frontier comparisons never use tolerances.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bridge;
pub mod eval;
pub mod frontier;
pub mod oracle;
pub mod policy;
pub mod random;
pub mod solve;
pub mod tree;
pub mod value;

pub use eval::{best_response, evaluate_policy, minimax_follower_value, EvalError, Threats};
pub use frontier::{
    clip_frontier, leaf_frontier, merge_follower, merge_leader, prune_envelope, raw_frontier, sigma_thresholds,
    Frontier, FrontierPoint, FrontierSegment, Origin, SigmaThresholds,
};
pub use oracle::{
    enumerate_pure_leader, grid_search_leader, verify_point, GridSearch, OracleError, OracleMethod, OracleResult,
    GRID_BRANCHING_LIMIT, GRID_LEADER_LIMIT, GRID_WORK_LIMIT, PURE_LEADER_LIMIT,
};
pub use policy::{Distribution, Policy, PolicyError};
pub use random::{random_tree, random_tree_with, RandomTreeParams};
pub use solve::{
    extract_equilibrium, extract_punishment, solve_frontier, unroll_policy, ExtractError, FrontierMap, SolveError,
    Support, TargetPoint, UnrollError,
};
pub use tree::{validate_tree, ActionId, GameTree, NodeId, Owner, TreeBuilder, ValidationReport};
pub use value::{Cap, Cents, PayoffPair, Value, ValuePair};
