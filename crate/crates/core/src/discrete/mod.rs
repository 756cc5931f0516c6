//! Discrete stooge selection: lazy greedy, node-measure baselines, and set
//! utilities for comparing selections.

mod baseline;
mod gain;
mod greedy;
mod sets;

pub use baseline::{baseline_nodes, baseline_select, betweenness, BaselineKind};
pub use gain::{marginal_gain, GainFunction, ScoreParams};
pub use greedy::{lazy_greedy, lazy_greedy_with, MIN_GAIN};
pub use sets::{jaccard, round_to_stooges};
