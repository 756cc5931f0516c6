//! Seeded synthetic topologies and opinion distributions.

use std::collections::{HashSet, VecDeque};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, Network};

const OPINION_MEAN: f64 = 0.45;
const OPINION_STD: f64 = 0.1;
const GNP_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Grid { rows: usize, cols: usize },
    Star { n: usize },
    Gnp { n: usize, p: f64 },
    /// Uniform random labelled tree; `directed` orients arcs away from node 0.
    RandomTree {
        n: usize,
        #[serde(default)]
        directed: bool,
    },
    Ba {
        n: usize,
        #[serde(default = "default_attach")]
        attach: usize,
    },
    /// One block of 50 nodes and five of 10, with intra-block probability 0.5
    /// and inter-block probability 0.3; `swap` exchanges the two.
    Communities {
        #[serde(default)]
        swap: bool,
    },
    /// Each new node hangs below one of the `window` most recent nodes.
    DepthTree {
        n: usize,
        #[serde(default = "default_window")]
        window: usize,
    },
    /// Breadth-first hierarchy where every manager gets a uniform number of
    /// subordinates in `min_children..=max_children`.
    OrgChart {
        n: usize,
        #[serde(default = "default_min_children")]
        min_children: usize,
        #[serde(default = "default_max_children")]
        max_children: usize,
    },
}

fn default_attach() -> usize {
    5
}
fn default_window() -> usize {
    5
}
fn default_min_children() -> usize {
    2
}
fn default_max_children() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpinionDist {
    /// Normal with mean 0.45 and deviation 0.1, redrawn outside [0,1].
    #[default]
    Normal,
    /// Log-normal matched to mean 0.45 and deviation 0.1, redrawn outside [0,1].
    Lognormal,
    /// 0.35 or 0.55 with equal probability.
    Bimodal,
    /// One opinion per node, read from a file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub topology: Topology,
    #[serde(default)]
    pub opinions: OpinionDist,
    #[serde(default)]
    pub seed: u64,
}

/// Builds the network and samples opinions; resistances are all 1/2.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let net = generate_network(&spec.topology, &mut rng)?;
    let s = sample_opinions(&spec.opinions, net.node_count(), &mut rng)?;
    Instance::uniform(net, 0.5, s)
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::invalid(format!("{name} must be positive")));
    }
    Ok(())
}

pub fn generate_network<R: Rng>(topology: &Topology, rng: &mut R) -> Result<Network> {
    match *topology {
        Topology::Grid { rows, cols } => {
            positive("rows", rows)?;
            positive("cols", cols)?;
            grid(rows, cols)
        }
        Topology::Star { n } => {
            positive("n", n)?;
            let pairs: Vec<_> = (1..n).map(|v| (0, v)).collect();
            Network::unweighted(n, &pairs, false)
        }
        Topology::Gnp { n, p } => gnp(n, p, rng),
        Topology::RandomTree { n, directed } => random_tree(n, directed, rng),
        Topology::Ba { n, attach } => barabasi_albert(n, attach, rng),
        Topology::Communities { swap } => {
            let (intra, inter) = if swap { (0.3, 0.5) } else { (0.5, 0.3) };
            communities(&[50, 10, 10, 10, 10, 10], intra, inter, rng)
        }
        Topology::DepthTree { n, window } => {
            positive("n", n)?;
            positive("window", window)?;
            let pairs: Vec<_> = (1..n)
                .map(|v| (rng.random_range(v.saturating_sub(window)..v), v))
                .collect();
            Network::unweighted(n, &pairs, true)
        }
        Topology::OrgChart {
            n,
            min_children,
            max_children,
        } => org_chart(n, min_children, max_children, rng),
    }
}

fn grid(rows: usize, cols: usize) -> Result<Network> {
    let id = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                pairs.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Network::unweighted(rows * cols, &pairs, false)
}

fn is_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in pairs {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

fn gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Network> {
    positive("n", n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability must lie in [0,1], got {p}")));
    }
    for _ in 0..GNP_RETRIES {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    pairs.push((u, v));
                }
            }
        }
        if is_connected(n, &pairs) {
            return Network::unweighted(n, &pairs, false);
        }
    }
    Err(Error::invalid(format!(
        "no connected G(n={n}, p={p}) sample in {GNP_RETRIES} attempts"
    )))
}

/// Decodes a uniformly random Prüfer sequence.
fn random_tree<R: Rng>(n: usize, directed: bool, rng: &mut R) -> Result<Network> {
    positive("n", n)?;
    let mut pairs = Vec::with_capacity(n.saturating_sub(1));
    if n == 2 {
        pairs.push((0, 1));
    } else if n > 2 {
        let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &c in &code {
            degree[c] += 1;
        }
        let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        for &c in &code {
            let leaf = *leaves.iter().next().expect("a leaf always exists");
            leaves.remove(&leaf);
            pairs.push((leaf, c));
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.insert(c);
            }
        }
        let mut rest = leaves.into_iter();
        pairs.push((rest.next().unwrap(), rest.next().unwrap()));
    }
    if !directed {
        return Network::unweighted(n, &pairs, false);
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &pairs {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut arcs = Vec::with_capacity(pairs.len());
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        adj[u].sort_unstable();
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                arcs.push((u, v));
                queue.push_back(v);
            }
        }
    }
    Network::unweighted(n, &arcs, true)
}

/// Preferential attachment grown from a clique on `attach + 1` nodes.
fn barabasi_albert<R: Rng>(n: usize, attach: usize, rng: &mut R) -> Result<Network> {
    positive("attach", attach)?;
    if n <= attach {
        return Err(Error::invalid(format!("BA needs n > attach, got n={n}, attach={attach}")));
    }
    let mut pairs = Vec::new();
    // Each node appears once per incident edge, so uniform draws are degree-proportional.
    let mut ends = Vec::new();
    for u in 0..=attach {
        for v in u + 1..=attach {
            pairs.push((u, v));
            ends.extend([u, v]);
        }
    }
    for v in attach + 1..n {
        let mut targets = HashSet::with_capacity(attach);
        while targets.len() < attach {
            targets.insert(ends[rng.random_range(0..ends.len())]);
        }
        let mut targets: Vec<_> = targets.into_iter().collect();
        targets.sort_unstable();
        for u in targets {
            pairs.push((u, v));
            ends.extend([u, v]);
        }
    }
    Network::unweighted(n, &pairs, false)
}

fn communities<R: Rng>(sizes: &[usize], intra: f64, inter: f64, rng: &mut R) -> Result<Network> {
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let n = block.len();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { intra } else { inter };
            if rng.random_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    Network::unweighted(n, &pairs, false)
}

fn org_chart<R: Rng>(n: usize, min_children: usize, max_children: usize, rng: &mut R) -> Result<Network> {
    positive("n", n)?;
    positive("min_children", min_children)?;
    if max_children < min_children {
        return Err(Error::invalid("max_children must be at least min_children"));
    }
    let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    let mut queue = VecDeque::from([0]);
    let mut next = 1;
    while next < n {
        let boss = queue.pop_front().expect("queue holds every node without subordinates");
        let count = rng.random_range(min_children..=max_children);
        for _ in 0..count {
            if next == n {
                break;
            }
            arcs.push((boss, next));
            queue.push_back(next);
            next += 1;
        }
    }
    Network::unweighted(n, &arcs, true)
}

/// Samples `n` opinions in [0,1].
pub fn sample_opinions<R: Rng>(dist: &OpinionDist, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let redraw = |d: &dyn Fn(&mut R) -> f64, rng: &mut R| loop {
        let v = d(rng);
        if (0.0..=1.0).contains(&v) {
            break v;
        }
    };
    match dist {
        OpinionDist::Normal => {
            let normal = Normal::new(OPINION_MEAN, OPINION_STD).expect("valid parameters");
            Ok((0..n).map(|_| redraw(&|r: &mut R| normal.sample(r), rng)).collect())
        }
        OpinionDist::Lognormal => {
            let sigma2 = (1.0 + (OPINION_STD / OPINION_MEAN).powi(2)).ln();
            let mu = OPINION_MEAN.ln() - sigma2 / 2.0;
            let lognormal = LogNormal::new(mu, sigma2.sqrt()).expect("valid parameters");
            Ok((0..n).map(|_| redraw(&|r: &mut R| lognormal.sample(r), rng)).collect())
        }
        OpinionDist::Bimodal => Ok((0..n)
            .map(|_| if rng.random_bool(0.5) { 0.35 } else { 0.55 })
            .collect()),
        OpinionDist::File { path } => {
            let values = crate::instances::io::read_opinion_column(path)?;
            if values.len() != n {
                return Err(Error::invalid(format!(
                    "{} holds {} opinions for {n} nodes",
                    path.display(),
                    values.len()
                )));
            }
            Ok(values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_dp::is_hierarchy;

    fn spec(topology: Topology, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            topology,
            opinions: OpinionDist::Normal,
            seed,
        }
    }

    #[test]
    fn grid_degrees() {
        let inst = generate(&spec(Topology::Grid { rows: 10, cols: 10 }, 0)).unwrap();
        let net = inst.network();
        assert_eq!(net.node_count(), 100);
        assert_eq!(net.degree(11), 4.0);
        assert_eq!(net.degree(0), 2.0);
        assert_eq!(net.edge_count(), 180);
        assert!(inst.alpha().iter().all(|&a| a == 0.5));
    }

    #[test]
    fn star_center_degree() {
        let inst = generate(&spec(Topology::Star { n: 100 }, 0)).unwrap();
        assert_eq!(inst.network().degree(0), 99.0);
    }

    #[test]
    fn generators_are_deterministic() {
        let topologies = [
            Topology::Gnp { n: 60, p: 0.1 },
            Topology::RandomTree { n: 30, directed: false },
            Topology::Ba { n: 40, attach: 5 },
            Topology::Communities { swap: false },
            Topology::DepthTree { n: 30, window: 5 },
            Topology::OrgChart { n: 30, min_children: 2, max_children: 5 },
        ];
        for t in topologies {
            let a = generate(&spec(t.clone(), 9)).unwrap();
            let b = generate(&spec(t.clone(), 9)).unwrap();
            assert_eq!(a, b);
            assert!(a.s().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn trees_have_n_minus_one_edges() {
        for seed in 0..5 {
            let t = generate(&spec(Topology::RandomTree { n: 25, directed: false }, seed)).unwrap();
            assert_eq!(t.network().edge_count(), 24);
            let pairs: Vec<_> = t.network().edges().iter().map(|&(u, v, _)| (u, v)).collect();
            assert!(is_connected(25, &pairs));
            for topology in [
                Topology::RandomTree { n: 25, directed: true },
                Topology::DepthTree { n: 25, window: 5 },
                Topology::OrgChart { n: 25, min_children: 2, max_children: 5 },
            ] {
                let h = generate(&spec(topology, seed)).unwrap();
                assert!(is_hierarchy(h.network()));
            }
        }
    }

    #[test]
    fn gnp_is_connected_and_bounded_retries() {
        let g = generate(&spec(Topology::Gnp { n: 50, p: 0.1 }, 3)).unwrap();
        let pairs: Vec<_> = g.network().edges().iter().map(|&(u, v, _)| (u, v)).collect();
        assert!(is_connected(50, &pairs));
        assert!(generate(&spec(Topology::Gnp { n: 50, p: 0.0 }, 3)).is_err());
    }

    #[test]
    fn ba_has_expected_edge_count() {
        let g = generate(&spec(Topology::Ba { n: 40, attach: 5 }, 1)).unwrap();
        assert_eq!(g.network().edge_count(), 15 + 5 * 34);
        assert!(generate(&spec(Topology::Ba { n: 5, attach: 5 }, 1)).is_err());
    }

    #[test]
    fn communities_density_follows_probabilities() {
        let g = generate(&spec(Topology::Communities { swap: false }, 2)).unwrap();
        assert_eq!(g.node_count(), 100);
        let intra_pairs = 50 * 49 / 2 + 5 * 45;
        let inter_pairs = 100 * 99 / 2 - intra_pairs;
        let expected = 0.5 * intra_pairs as f64 + 0.3 * inter_pairs as f64;
        let m = g.network().edge_count() as f64;
        assert!((m - expected).abs() < 0.05 * expected);
    }

    #[test]
    fn bimodal_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_opinions(&OpinionDist::Bimodal, 1_000_000, &mut rng).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 0.45).abs() < 0.001);
    }

    #[test]
    fn continuous_distributions_have_target_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dist in [OpinionDist::Normal, OpinionDist::Lognormal] {
            let s = sample_opinions(&dist, 200_000, &mut rng).unwrap();
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / s.len() as f64;
            assert!((mean - 0.45).abs() < 0.005, "{dist:?} mean {mean}");
            assert!((var.sqrt() - 0.1).abs() < 0.005, "{dist:?} std {}", var.sqrt());
        }
    }
}
