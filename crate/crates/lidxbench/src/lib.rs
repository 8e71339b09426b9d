//! Workbench for stress-testing an adaptive learned index under adversarial
//! insert workloads, next to a classical ordered-map baseline.
//!
//! The pieces: an updatable learned index (`learned_index`), a B-tree-map
//! baseline (`baseline`), adversarial key-stream generators (`attacks`), key
//! file handling and synthetic data (`datasets`), the round-based measurement
//! protocol (`harness`), and post-hoc diagnostics (`analysis`).

pub mod analysis;
pub mod attacks;
pub mod baseline;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod harness;
pub mod learned_index;

pub use error::{Error, Result};
