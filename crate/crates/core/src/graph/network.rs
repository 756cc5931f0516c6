use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weighted arc `(source, target, weight)`.
pub type Arc = (usize, usize, f64);

/// Weighted graph with row-normalized influence semantics.
///
/// Adjacency is stored in compressed rows sorted by target id. Row `u` of the
/// influence matrix `W` is `w_uv / deg(u)` over the out-neighbors `v` of `u`;
/// a node without out-neighbors has an all-zero row. Undirected edges are
/// stored as two arcs of equal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    directed: bool,
    self_loops: bool,
    edges: Vec<Arc>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl Network {
    /// Builds a network without self-loops.
    pub fn new(n: usize, edges: Vec<Arc>, directed: bool) -> Result<Self> {
        Self::build(n, edges, directed, false)
    }

    /// Builds a network in which arcs `(u, u, w)` are accepted.
    pub fn with_self_loops(n: usize, edges: Vec<Arc>, directed: bool) -> Result<Self> {
        Self::build(n, edges, directed, true)
    }

    /// Convenience constructor for unit-weight edges.
    pub fn unweighted(n: usize, pairs: &[(usize, usize)], directed: bool) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect(), directed)
    }

    fn build(n: usize, edges: Vec<Arc>, directed: bool, self_loops: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a network needs at least one node"));
        }
        let mut seen = HashSet::with_capacity(edges.len() * 2);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight {
                    source_node: u,
                    target: v,
                    weight: w,
                });
            }
            if u == v && !self_loops {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateArc(u, v));
            }
            rows[u].push((v, w));
            if !directed && u != v {
                if !seen.insert((v, u)) {
                    return Err(Error::DuplicateArc(v, u));
                }
                rows[v].push((u, w));
            }
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut degree = Vec::with_capacity(n);
        offsets.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(v, _)| v);
            degree.push(row.iter().map(|&(_, w)| w).sum());
            for &(v, w) in row.iter() {
                targets.push(v);
                weights.push(w);
            }
            offsets.push(targets.len());
        }

        Ok(Network {
            n,
            directed,
            self_loops,
            edges,
            offsets,
            targets,
            weights,
            degree,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn allows_self_loops(&self) -> bool {
        self.self_loops
    }

    /// The edges as supplied at construction (undirected edges appear once).
    pub fn edges(&self) -> &[Arc] {
        &self.edges
    }

    /// Number of edges as supplied: undirected edges count once.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of stored directed arcs.
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Out-neighbors of `u` with raw weights, sorted by target id.
    pub fn out_arcs(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[u]..self.offsets[u + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn out_len(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// `deg(u)`, the summed out-weight of `u`.
    pub fn degree(&self, u: usize) -> f64 {
        self.degree[u]
    }

    /// Dense row `u` of the normalized influence matrix.
    pub fn influence_row(&self, u: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n];
        let d = self.degree[u];
        for (v, w) in self.out_arcs(u) {
            row[v] += w / d;
        }
        row
    }

    /// `W x`.
    pub fn influence_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|u| {
                let d = self.degree[u];
                if d == 0.0 {
                    return 0.0;
                }
                let acc: f64 = self.out_arcs(u).map(|(v, w)| w * x[v]).sum();
                acc / d
            })
            .collect()
    }

    /// `Wᵀ z`, accumulated into `out`.
    pub(crate) fn influence_mul_transpose_into(&self, z: &[f64], out: &mut [f64]) {
        for u in 0..self.n {
            let d = self.degree[u];
            if d == 0.0 || z[u] == 0.0 {
                continue;
            }
            let scale = z[u] / d;
            for (v, w) in self.out_arcs(u) {
                out[v] += w * scale;
            }
        }
    }

    /// In-degree counted in arcs (self-loops included).
    pub fn in_arc_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for &v in &self.targets {
            counts[v] += 1;
        }
        counts
    }

    /// Number of distinct nodes adjacent to `u` in either direction, ignoring self-loops.
    pub fn neighbor_counts(&self) -> Vec<usize> {
        let mut sets: Vec<HashSet<usize>> = vec![HashSet::new(); self.n];
        for u in 0..self.n {
            for (v, _) in self.out_arcs(u) {
                if u != v {
                    sets[u].insert(v);
                    sets[v].insert(u);
                }
            }
        }
        sets.into_iter().map(|s| s.len()).collect()
    }
}

/// Serialized form of a [`Network`], shared by the canonical instance format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub(crate) struct NetworkRecord {
    pub n: usize,
    pub directed: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub self_loops: bool,
    pub edges: Vec<Arc>,
}

impl From<&Network> for NetworkRecord {
    fn from(net: &Network) -> Self {
        NetworkRecord {
            n: net.n,
            directed: net.directed,
            self_loops: net.self_loops,
            edges: net.edges.clone(),
        }
    }
}

impl TryFrom<NetworkRecord> for Network {
    type Error = Error;

    fn try_from(rec: NetworkRecord) -> Result<Self> {
        Network::build(rec.n, rec.edges, rec.directed, rec.self_loops)
    }
}
