//! Scenario runner behind the `ncmontel` binary.

pub mod config;
pub mod output;
pub mod scenarios;

pub use scenarios::{make_shifting_sequence, Outcome};
