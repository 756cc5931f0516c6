//! Networks, FJ equilibria, and order statistics of opinion vectors.

mod instance;
mod network;
mod order;
mod solve;

pub use instance::Instance;
pub use network::{Arc, Network};
pub(crate) use network::NetworkRecord;
pub use order::{mean, median, quantile};
pub use solve::{
    equilibrium, equilibrium_for, equilibrium_with, simulate, EquilibriumSolution, SolverOptions,
};
pub(crate) use solve::FjOperator;
