//! Independent oracles and instance builders shared by the integration tests.
#![allow(dead_code)]

use fj_median::graph::{equilibrium_for, median, Instance, Network, SolverOptions};
use fj_median::instances::SetCoverSpec;
use fj_median::tree_dp::TreeInstance;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-6;

pub fn tight() -> SolverOptions {
    SolverOptions {
        tol: 1e-14,
        max_iters: Some(20_000),
    }
}

/// Connected random instance: a random spanning tree plus extra arcs.
pub fn connected_instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u.min(v), u.max(v)));
        edges.push((u, v, rng.random_range(0.5..2.0)));
    }
    for _ in 0..n {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v, rng.random_range(0.5..2.0)));
        }
    }
    let net = Network::new(n, edges, false).unwrap();
    let alpha = (0..n).map(|_| rng.random_range(0.1..0.9)).collect();
    let s = (0..n).map(|_| rng.random::<f64>()).collect();
    Instance::new(net, alpha, s).unwrap()
}

pub fn x_star(inst: &Instance, alpha: &[f64]) -> Vec<f64> {
    equilibrium_for(inst.network(), alpha, inst.s(), &tight())
        .unwrap()
        .x_star
}

pub fn central_difference(inst: &Instance, u: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut plus = inst.alpha().to_vec();
    let mut minus = plus.clone();
    plus[u] += H;
    minus[u] -= H;
    (f(&x_star(inst, &plus)) - f(&x_star(inst, &minus))) / (2.0 * H)
}

pub fn close(analytic: f64, numeric: f64, rel: f64) -> bool {
    (analytic - numeric).abs() <= rel * analytic.abs().max(numeric.abs()) + 1e-7
}

/// Dykstra's alternating projection between the box and the L1 ball.
pub fn dykstra(alpha_prime: &[f64], alpha0: &[f64], k: f64) -> Vec<f64> {
    fn ball(y: &[f64], a0: &[f64], k: f64) -> Vec<f64> {
        let d: Vec<f64> = y.iter().zip(a0).map(|(a, b)| a - b).collect();
        if d.iter().map(|v| v.abs()).sum::<f64>() <= k {
            return y.to_vec();
        }
        let (mut lo, mut hi) = (0.0, d.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d.iter().map(|v| (v.abs() - mid).max(0.0)).sum::<f64>() > k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        a0.iter()
            .zip(&d)
            .map(|(b, v)| b + (v.abs() - hi).max(0.0).copysign(*v))
            .collect()
    }
    let n = alpha_prime.len();
    let mut x = alpha_prime.to_vec();
    let (mut p, mut q) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..100_000 {
        let y: Vec<f64> = (0..n).map(|i| (x[i] + p[i]).clamp(0.0, 1.0)).collect();
        let mut drift = 0.0_f64;
        for i in 0..n {
            let np = x[i] + p[i] - y[i];
            drift = drift.max((np - p[i]).abs());
            p[i] = np;
        }
        let shifted: Vec<f64> = (0..n).map(|i| y[i] + q[i]).collect();
        let next = ball(&shifted, alpha0, k);
        for i in 0..n {
            let nq = shifted[i] - next[i];
            drift = drift.max((nq - q[i]).abs());
            q[i] = nq;
        }
        let change = next.iter().zip(&x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        if change.max(drift) < 1e-14 {
            break;
        }
    }
    x
}

pub fn greedy_instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for _ in 0..n / 2 {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        let (a, b) = (u.min(v), u.max(v));
        if a != b && !pairs.iter().any(|&(x, y)| (x.min(y), x.max(y)) == (a, b)) {
            pairs.push((a, b));
        }
    }
    let net = Network::unweighted(n, &pairs, false).unwrap();
    let s = (0..n).map(|_| rng.random_range(0.2..0.7)).collect();
    Instance::uniform(net, 0.5, s).unwrap()
}

/// Plain greedy: every iteration evaluates every non-stooge candidate.
pub fn exhaustive_greedy(inst: &Instance, k: usize, theta: f64) -> Vec<(usize, f64)> {
    let opts = SolverOptions::default();
    let solve = |alpha: &[f64]| {
        let x = equilibrium_for(inst.network(), alpha, inst.s(), &opts).unwrap().x_star;
        median(&x).unwrap()
    };
    let mut alpha = inst.alpha().to_vec();
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    for _ in 0..k {
        let base = solve(&alpha);
        if base > theta {
            break;
        }
        let mut best: Option<(f64, usize, f64)> = None;
        for u in 0..inst.node_count() {
            if chosen.iter().any(|&(v, _)| v == u) {
                continue;
            }
            for r in [1.0, 0.0] {
                let gain = if alpha[u] == r {
                    0.0
                } else {
                    let mut a = alpha.clone();
                    a[u] = r;
                    solve(&a) - base
                };
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, u, r));
                }
            }
        }
        match best {
            Some((g, u, r)) if g > 1e-12 => {
                alpha[u] = r;
                chosen.push((u, r));
            }
            _ => break,
        }
    }
    chosen
}

pub fn random_set_cover(rng: &mut ChaCha8Rng) -> SetCoverSpec {
    let universe = rng.random_range(1..=6);
    let m = rng.random_range(1..=5);
    let sets = (0..m)
        .map(|_| {
            let mut s: Vec<usize> = (0..universe).filter(|_| rng.random_bool(0.4)).collect();
            if s.is_empty() {
                s.push(rng.random_range(0..universe));
            }
            s
        })
        .collect();
    let k = rng.random_range(1..=3.min(m));
    SetCoverSpec { universe, sets, k }
}

/// Does some family of at most `k` sets cover the universe?
pub fn has_cover(spec: &SetCoverSpec) -> bool {
    let full = (1u32 << spec.universe) - 1;
    let masks: Vec<u32> = spec.sets.iter().map(|s| s.iter().fold(0, |m, &e| m | 1 << e)).collect();
    (0u32..1 << masks.len()).any(|pick| {
        pick.count_ones() as usize <= spec.k
            && (0..masks.len()).filter(|j| pick >> j & 1 == 1).fold(0, |m, j| m | masks[j]) == full
    })
}

pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m)
        .filter(|p| p.count_ones() as usize == k)
        .map(|p| (0..m).filter(|j| p >> j & 1 == 1).collect())
        .collect()
}

/// Random hierarchy with shuffled labels, so the root is not always node 0.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Instance {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let arcs: Vec<_> = (1..n)
        .map(|v| {
            let parent = rng.random_range(0..v);
            let w = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.5..2.0) };
            (labels[parent], labels[v], w)
        })
        .collect();
    let net = Network::new(n, arcs, true).unwrap();
    let alpha = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let s = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    Instance::new(net, alpha, s).unwrap()
}

pub fn decorate(tree: TreeInstance, rng: &mut ChaCha8Rng) -> TreeInstance {
    let n = tree.node_count();
    let tree = if rng.random_bool(0.3) {
        tree.with_voting((0..n).map(|_| rng.random_bool(0.7)).collect()).unwrap()
    } else {
        tree
    };
    if rng.random_bool(0.3) {
        tree.with_costs((0..n).map(|_| rng.random_range(1..=3)).collect()).unwrap()
    } else {
        tree
    }
}
