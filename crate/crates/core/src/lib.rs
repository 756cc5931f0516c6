//! Median manipulation under generalized Friedkin-Johnsen opinion dynamics.
//!
//! The crate computes FJ equilibria and implements continuous (Huber
//! M-estimator and sigmoid gradient ascent), discrete (lazy greedy and node
//! measure baselines) and exact (tree dynamic programming) strategies for
//! pushing the median equilibrium opinion past a threshold.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod graph;
pub mod instances;
pub mod intervention;
pub mod method;
pub mod optimize;
pub mod tree_dp;

pub use error::{Error, Result};
pub use intervention::{InterventionResult, TracePoint};
