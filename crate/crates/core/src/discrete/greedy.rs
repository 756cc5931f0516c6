//! Lazy greedy stooge selection.
//!
//! Each iteration scans candidates `(u, r)` in descending order of their
//! stored gains and refreshes them. Because gains only go stale rather than
//! wrong, the scan stops once `phi` times the best fresh gain reaches the next
//! stored gain. With `phi = 0` the scan is exhaustive.

use rayon::prelude::*;

use crate::discrete::gain::{gain_at, GainFunction};
use crate::error::{Error, Result};
use crate::graph::{equilibrium_for, median, Instance, SolverOptions};
use crate::intervention::{l1_distance, InterventionResult, TracePoint};

/// Gains at or below this are solver noise, not progress.
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    u: usize,
    r: f64,
}

/// Ranks `(gain, u, r)` by gain descending, then smaller id, then `r = 1` first.
fn better(a: (f64, Candidate), b: (f64, Candidate)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.1.u != b.1.u {
        return a.1.u < b.1.u;
    }
    a.1.r > b.1.r
}

pub fn lazy_greedy(
    instance: &Instance,
    k: usize,
    phi: f64,
    gain: &GainFunction,
    theta: f64,
) -> Result<InterventionResult> {
    lazy_greedy_with(instance, k, phi, gain, theta, &SolverOptions::default())
}

pub fn lazy_greedy_with(
    instance: &Instance,
    k: usize,
    phi: f64,
    gain: &GainFunction,
    theta: f64,
    opts: &SolverOptions,
) -> Result<InterventionResult> {
    let n = instance.node_count();
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::invalid(format!("phi must lie in [0,1], got {phi}")));
    }
    if k > n {
        return Err(Error::invalid(format!("budget {k} exceeds node count {n}")));
    }
    gain.validate()?;

    let alpha0 = instance.alpha();
    let mut alpha = alpha0.to_vec();
    let mut is_stooge = vec![false; n];
    // stored[2u + r]
    let mut stored = vec![f64::INFINITY; 2 * n];
    let mut evaluations = Vec::new();
    let mut sequence = Vec::new();
    let mut trace = Vec::new();

    let mut x = equilibrium_for(instance.network(), &alpha, instance.s(), opts)?.x_star;
    let mut current_median = median(&x)?;
    for iteration in 0..k {
        if current_median > theta {
            break;
        }
        let base = gain.objective(&x)?;
        trace.push(TracePoint {
            iteration,
            surrogate: base,
            true_median: current_median,
            l1_used: l1_distance(&alpha, alpha0),
        });

        let mut order: Vec<Candidate> = (0..n)
            .filter(|&u| !is_stooge[u])
            .flat_map(|u| [Candidate { u, r: 1.0 }, Candidate { u, r: 0.0 }])
            .collect();
        let slot = |c: &Candidate| 2 * c.u + c.r as usize;
        order.sort_by(|a, b| {
            stored[slot(b)]
                .total_cmp(&stored[slot(a)])
                .then(a.u.cmp(&b.u))
                .then(b.r.total_cmp(&a.r))
        });

        let mut best: Option<(f64, Candidate)> = None;
        let mut solved = 0;
        if phi == 0.0 {
            let gains: Vec<f64> = order
                .par_iter()
                .map(|c| gain_at(instance, &alpha, base, c.u, c.r, gain, opts))
                .collect::<Result<_>>()?;
            for (c, g) in order.iter().zip(gains) {
                stored[slot(c)] = g;
                if alpha[c.u] != c.r {
                    solved += 1;
                }
                if best.is_none_or(|b| better((g, *c), b)) {
                    best = Some((g, *c));
                }
            }
        } else {
            for c in &order {
                let m_hat = best.map_or(0.0, |(g, _)| g.max(0.0));
                if phi * m_hat >= stored[slot(c)] {
                    break;
                }
                let g = gain_at(instance, &alpha, base, c.u, c.r, gain, opts)?;
                if alpha[c.u] != c.r {
                    solved += 1;
                }
                stored[slot(c)] = g;
                if best.is_none_or(|b| better((g, *c), b)) {
                    best = Some((g, *c));
                }
            }
        }
        evaluations.push(solved);

        match best {
            Some((g, c)) if g > MIN_GAIN => {
                alpha[c.u] = c.r;
                is_stooge[c.u] = true;
                sequence.push((c.u, c.r));
                x = equilibrium_for(instance.network(), &alpha, instance.s(), opts)?.x_star;
                current_median = median(&x)?;
            }
            _ => {
                log::debug!("greedy found no positive gain at iteration {iteration}");
                break;
            }
        }
    }
    trace.push(TracePoint {
        iteration: trace.len(),
        surrogate: gain.objective(&x)?,
        true_median: current_median,
        l1_used: l1_distance(&alpha, alpha0),
    });

    let mut result = InterventionResult::from_alpha(alpha0, alpha, current_median, theta);
    // Commit order rather than id order.
    result.stooges = sequence;
    result.iterations = evaluations.len();
    result.evaluations = evaluations;
    result.objective_trace = trace;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Network;

    #[test]
    fn zero_budget_changes_nothing() {
        let net = Network::unweighted(3, &[(0, 1), (1, 2)], false).unwrap();
        let inst = Instance::uniform(net, 0.5, vec![0.2, 0.3, 0.9]).unwrap();
        let r = lazy_greedy(&inst, 0, 0.8, &GainFunction::Median, 0.5).unwrap();
        assert!(r.stooges.is_empty());
        assert_eq!(r.alpha_final, inst.alpha());
    }

    #[test]
    fn single_node_becomes_stubborn() {
        let net = Network::new(1, vec![], true).unwrap();
        let inst = Instance::new(net, vec![0.5], vec![0.6]).unwrap();
        let r = lazy_greedy(&inst, 1, 0.8, &GainFunction::Median, 0.5).unwrap();
        assert_eq!(r.stooges, vec![(0, 1.0)]);
        assert!(r.flipped);
        assert_eq!(r.evaluations, vec![2]);
    }

    #[test]
    fn stops_once_above_threshold() {
        let net = Network::new(2, vec![], true).unwrap();
        let inst = Instance::uniform(net, 1.0, vec![0.7, 0.8]).unwrap();
        let r = lazy_greedy(&inst, 2, 0.0, &GainFunction::Median, 0.5).unwrap();
        assert!(r.stooges.is_empty());
        assert!(r.flipped);
        assert!(r.evaluations.is_empty());
    }

    #[test]
    fn rejects_bad_arguments() {
        let net = Network::new(1, vec![], true).unwrap();
        let inst = Instance::new(net, vec![0.5], vec![0.6]).unwrap();
        assert!(lazy_greedy(&inst, 2, 0.8, &GainFunction::Median, 0.5).is_err());
        assert!(lazy_greedy(&inst, 1, 1.5, &GainFunction::Median, 0.5).is_err());
    }
}
