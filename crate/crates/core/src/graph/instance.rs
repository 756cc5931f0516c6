use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Network;

/// A network together with resistances `alpha` and innate opinions `s`.
///
/// The network sits behind an [`Arc`] so that resistance variants produced by
/// the optimizers share one adjacency structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    network: Arc<Network>,
    alpha: Vec<f64>,
    s: Vec<f64>,
}

fn check_unit_vector(what: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::invalid(format!(
            "{what} has length {}, expected {n}",
            values.len()
        )));
    }
    for (u, &v) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfUnitRange {
                what: format!("{what}[{u}]"),
                value: v,
            });
        }
    }
    Ok(())
}

impl Instance {
    pub fn new(network: impl Into<Arc<Network>>, alpha: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        let network = network.into();
        let n = network.node_count();
        check_unit_vector("alpha", &alpha, n)?;
        check_unit_vector("s", &s, n)?;
        Ok(Instance { network, alpha, s })
    }

    /// Instance with every resistance set to `alpha`.
    pub fn uniform(network: impl Into<Arc<Network>>, alpha: f64, s: Vec<f64>) -> Result<Self> {
        let network = network.into();
        let n = network.node_count();
        Self::new(network, vec![alpha; n], s)
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn shared_network(&self) -> Arc<Network> {
        Arc::clone(&self.network)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    /// Same network and opinions with new resistances.
    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::new(Arc::clone(&self.network), alpha, self.s.clone())
    }

    /// Same network and resistances with new innate opinions.
    pub fn with_opinions(&self, s: Vec<f64>) -> Result<Self> {
        Self::new(Arc::clone(&self.network), self.alpha.clone(), s)
    }
}
