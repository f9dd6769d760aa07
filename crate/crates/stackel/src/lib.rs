//! File formats, experiment harness, statistics and the game server built on
//! `stackel-core`.
//!
//! The `stackel` binary in this crate is the command-line front end.

pub mod config;
pub mod episodes;
pub mod frontier_csv;
pub mod harness;
pub mod money;
pub mod policy_file;
pub mod server;
pub mod stats;
pub mod tree_json;

pub use harness::{Group, SessionDriver, SessionRecord};
