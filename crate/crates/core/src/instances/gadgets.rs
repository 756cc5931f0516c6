//! Hardness gadgets and hand-built pathological instances.
//!
//! The set-cover gadget has, for a universe of size `n`, sets `S_1..S_m` and
//! budget `k`:
//! - element nodes `u_i` with `s = 0, alpha = 0`,
//! - set nodes `v_j` with `s = 0, alpha = 1`,
//! - sink nodes `w_j` with `s = 1, alpha = 1`,
//! - `l` isolated nodes with `s = 0`,
//!
//! and arcs `u_i -> v_j` for `i in S_j` and `v_j -> w_j`. Making `v_j` a
//! stooge with `alpha = 0` lifts it to 1, which lifts every element it
//! contains above 0. With `l = n + 2k` the median is positive after `k`
//! stooges iff the chosen sets cover the universe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, Network};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCoverSpec {
    pub universe: usize,
    /// Subsets of `0..universe`.
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

impl SetCoverSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k > self.sets.len() {
            return Err(Error::invalid(format!(
                "budget {} exceeds the number of sets {}",
                self.k,
                self.sets.len()
            )));
        }
        for (j, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::invalid(format!("set {j} is empty")));
            }
            if let Some(&e) = set.iter().find(|&&e| e >= self.universe) {
                return Err(Error::invalid(format!(
                    "set {j} contains {e}, outside a universe of size {}",
                    self.universe
                )));
            }
        }
        Ok(())
    }
}

/// Node ids of each part of a gadget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetLayout {
    pub element_nodes: Vec<usize>,
    /// `set_nodes[j]` is the node of set `j`.
    pub set_nodes: Vec<usize>,
    pub sink_nodes: Vec<usize>,
    pub isolated_nodes: Vec<usize>,
}

fn build_gadget(spec: &SetCoverSpec, isolated: usize) -> Result<(Instance, GadgetLayout)> {
    spec.validate()?;
    let n = spec.universe;
    let m = spec.sets.len();
    let element_nodes: Vec<usize> = (0..n).collect();
    let set_nodes: Vec<usize> = (n..n + m).collect();
    let sink_nodes: Vec<usize> = (n + m..n + 2 * m).collect();
    let total = n + 2 * m + isolated;
    let isolated_nodes: Vec<usize> = (n + 2 * m..total).collect();

    let mut arcs = Vec::new();
    for (j, set) in spec.sets.iter().enumerate() {
        let mut members = set.clone();
        members.sort_unstable();
        members.dedup();
        for i in members {
            arcs.push((element_nodes[i], set_nodes[j], 1.0));
        }
        arcs.push((set_nodes[j], sink_nodes[j], 1.0));
    }
    let net = Network::new(total, arcs, true)?;

    let mut alpha = vec![1.0; total];
    let mut s = vec![0.0; total];
    for &u in &element_nodes {
        alpha[u] = 0.0;
    }
    for &w in &sink_nodes {
        s[w] = 1.0;
    }
    let layout = GadgetLayout {
        element_nodes,
        set_nodes,
        sink_nodes,
        isolated_nodes,
    };
    Ok((Instance::new(net, alpha, s)?, layout))
}

/// The gadget with `n + 2k` isolated nodes, `2(n + m + k)` nodes in total.
pub fn gen_set_cover_gadget(spec: &SetCoverSpec) -> Result<(Instance, GadgetLayout)> {
    build_gadget(spec, spec.universe + 2 * spec.k)
}

/// Number of isolated nodes of the quantile gadget:
/// `floor((1/q - 1) n + (1/q - 2) m + k / q)`.
pub fn quantile_padding(spec: &SetCoverSpec, q: f64) -> Result<usize> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0,1), got {q}")));
    }
    let (n, m, k) = (spec.universe as f64, spec.sets.len() as f64, spec.k as f64);
    let l = ((1.0 / q - 1.0) * n + (1.0 / q - 2.0) * m + k / q).floor();
    if l < 0.0 {
        return Err(Error::invalid(format!(
            "q = {q} gives a negative padding {l} for n={n}, m={m}, k={k}"
        )));
    }
    Ok(l as usize)
}

/// The gadget padded for the `q` upper-tail quantile: after `k` stooges the
/// opinion at ascending level `1 - q` is positive iff the stooges form a cover.
pub fn gen_quantile_gadget(spec: &SetCoverSpec, q: f64) -> Result<(Instance, GadgetLayout)> {
    let l = quantile_padding(spec, q)?;
    build_gadget(spec, l)
}

/// Makes the chosen set nodes stooges with resistance 0.
pub fn apply_cover(instance: &Instance, layout: &GadgetLayout, chosen: &[usize]) -> Result<Instance> {
    let mut alpha = instance.alpha().to_vec();
    for &j in chosen {
        let v = *layout
            .set_nodes
            .get(j)
            .ok_or_else(|| Error::invalid(format!("no set with index {j}")))?;
        alpha[v] = 0.0;
    }
    instance.with_alpha(alpha)
}

/// Seven spokes with `s = 0` pointing at a center with `s = 0.49` and
/// `alpha = 0`, optionally beside `filler` isolated nodes with `s = 0.3`.
///
/// Every innate opinion is below 1/2, so no resistance change can lift any
/// equilibrium opinion past 1/2.
pub fn stalling_component(filler: usize) -> Result<Instance> {
    let n = 8 + filler;
    let arcs: Vec<_> = (1..8).map(|u| (u, 0, 1.0)).collect();
    let net = Network::new(n, arcs, true)?;
    let mut alpha = vec![0.5; n];
    let mut s = vec![0.3; n];
    alpha[0] = 0.0;
    s[0] = 0.49;
    for u in 1..8 {
        s[u] = 0.0;
    }
    Instance::new(net, alpha, s)
}

/// A root over `managers` middle managers, each above one leaf with `s = 1`
/// and one with `s = 0.4`. Root and managers have `alpha = 1/2, s = 0`.
///
/// A single stooge never moves the median, so greedy stalls; the optimum sets
/// a majority of managers to `alpha = 0`.
pub fn stalling_hierarchy(managers: usize) -> Result<Instance> {
    if managers == 0 {
        return Err(Error::invalid("at least one manager is needed"));
    }
    let n = 1 + 3 * managers;
    let mut arcs = Vec::with_capacity(n - 1);
    let mut alpha = vec![0.5; n];
    let mut s = vec![0.0; n];
    for i in 0..managers {
        let manager = 1 + i;
        let high = 1 + managers + 2 * i;
        let low = high + 1;
        arcs.push((0, manager, 1.0));
        arcs.push((manager, high, 1.0));
        arcs.push((manager, low, 1.0));
        s[high] = 1.0;
        s[low] = 0.4;
        alpha[high] = 1.0;
        alpha[low] = 1.0;
    }
    Instance::new(Network::new(n, arcs, true)?, alpha, s)
}
