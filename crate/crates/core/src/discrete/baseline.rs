//! Node-measure baselines: random, max-degree and betweenness centrality.

use std::collections::VecDeque;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{equilibrium, median, Instance, Network};
use crate::intervention::InterventionResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Random,
    MaxDegree,
    Centrality,
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(BaselineKind::Random),
            "degree" | "max_degree" | "max-degree" => Ok(BaselineKind::MaxDegree),
            "centrality" | "betweenness" => Ok(BaselineKind::Centrality),
            other => Err(Error::invalid(format!("unknown baseline '{other}'"))),
        }
    }
}

/// Betweenness centrality on unweighted arcs (Brandes).
///
/// Undirected networks count each unordered pair once, so the middle of a
/// three-node path scores 1.
pub fn betweenness(network: &Network) -> Vec<f64> {
    let n = network.node_count();
    let mut score = vec![0.0; n];
    let mut sigma = vec![0.0_f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for source in 0..n {
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[source] = 1.0;
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for (w, _) in network.out_arcs(v) {
                if w == v {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != source {
                score[w] += delta[w];
            }
        }
    }
    if !network.is_directed() {
        for s in &mut score {
            *s /= 2.0;
        }
    }
    score
}

/// `k` nodes ranked by `key` descending, ties broken by smaller id.
fn top_k_by(key: &[f64], k: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..key.len()).collect();
    ids.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));
    ids.truncate(k);
    ids
}

/// Nodes chosen by a baseline, in selection order.
pub fn baseline_nodes(instance: &Instance, k: usize, kind: BaselineKind, seed: u64) -> Result<Vec<usize>> {
    let n = instance.node_count();
    if k > n {
        return Err(Error::invalid(format!("budget {k} exceeds node count {n}")));
    }
    let net = instance.network();
    Ok(match kind {
        BaselineKind::Random => {
            // A shuffled prefix keeps selections nested across budgets.
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            ids.truncate(k);
            ids
        }
        BaselineKind::MaxDegree => {
            let deg: Vec<f64> = net.neighbor_counts().into_iter().map(|d| d as f64).collect();
            top_k_by(&deg, k)
        }
        BaselineKind::Centrality => {
            // Round away summation-order noise so symmetric nodes tie exactly.
            let bc: Vec<f64> = betweenness(net)
                .into_iter()
                .map(|b| (b * 1e9).round() / 1e9)
                .collect();
            top_k_by(&bc, k)
        }
    })
}

/// Selects `k` stooges by the baseline measure and sets `alpha_u = 1` if
/// `s_u > theta`, else `alpha_u = 0`.
pub fn baseline_select(
    instance: &Instance,
    k: usize,
    kind: BaselineKind,
    theta: f64,
    seed: u64,
) -> Result<InterventionResult> {
    let chosen = baseline_nodes(instance, k, kind, seed)?;
    let mut alpha = instance.alpha().to_vec();
    let mut sequence = Vec::with_capacity(k);
    for &u in &chosen {
        let r = if instance.s()[u] > theta { 1.0 } else { 0.0 };
        alpha[u] = r;
        sequence.push((u, r));
    }
    let modified = instance.with_alpha(alpha)?;
    let x = equilibrium(&modified)?.x_star;
    let med = median(&x)?;
    let mut result = InterventionResult::from_alpha(instance.alpha(), modified.alpha().to_vec(), med, theta);
    // Every chosen node counts as a stooge even if its resistance was already r.
    result.stooges = sequence;
    result.l0_budget_used = chosen.len();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Network {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Network::unweighted(n, &pairs, false).unwrap()
    }

    fn star(n: usize) -> Network {
        let pairs: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Network::unweighted(n, &pairs, false).unwrap()
    }

    #[test]
    fn betweenness_on_paths_and_stars() {
        let b = betweenness(&path(3));
        assert_eq!(b, vec![0.0, 1.0, 0.0]);
        let b = betweenness(&path(5));
        assert_eq!(b, vec![0.0, 3.0, 4.0, 3.0, 0.0]);
        let b = betweenness(&star(5));
        assert_eq!(b[0], 6.0);
        assert!(b[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn directed_betweenness_counts_ordered_pairs() {
        let net = Network::unweighted(3, &[(0, 1), (1, 2)], true).unwrap();
        assert_eq!(betweenness(&net), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn degree_and_centrality_pick_obvious_nodes() {
        let inst = Instance::uniform(star(6), 0.5, vec![0.4; 6]).unwrap();
        assert_eq!(baseline_nodes(&inst, 1, BaselineKind::MaxDegree, 0).unwrap(), vec![0]);
        let inst = Instance::uniform(path(5), 0.5, vec![0.4; 5]).unwrap();
        assert_eq!(baseline_nodes(&inst, 1, BaselineKind::Centrality, 0).unwrap(), vec![2]);
        // Ties broken by id.
        assert_eq!(baseline_nodes(&inst, 3, BaselineKind::MaxDegree, 0).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn random_selection_is_nested_and_seeded() {
        let inst = Instance::uniform(path(20), 0.5, vec![0.4; 20]).unwrap();
        let a = baseline_nodes(&inst, 5, BaselineKind::Random, 7).unwrap();
        let b = baseline_nodes(&inst, 10, BaselineKind::Random, 7).unwrap();
        assert_eq!(a, b[..5]);
        let all = baseline_nodes(&inst, 20, BaselineKind::Random, 7).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn resistance_rule_follows_threshold() {
        let inst = Instance::uniform(path(3), 0.5, vec![0.2, 0.7, 0.5]).unwrap();
        let r = baseline_select(&inst, 3, BaselineKind::MaxDegree, 0.5, 0).unwrap();
        assert_eq!(r.alpha_final, vec![0.0, 1.0, 0.0]);
        assert_eq!(r.l0_budget_used, 3);
    }
}
