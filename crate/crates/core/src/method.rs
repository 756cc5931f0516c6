//! One entry point for every intervention method, and the search for the
//! smallest budget that flips the median.
//!
//! Budgets are counted in stooges. A discrete method with budget `k` picks
//! `k` stooges; a continuous method gets the L1 budget `k / 2`, the
//! resistance change of `k` stooges moved from 1/2 to 0 or 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discrete::{baseline_select, lazy_greedy, BaselineKind, GainFunction, ScoreParams};
use crate::error::{Error, Result};
use crate::estimators::{find_c, FindCConfig, HuberConfig, SigmoidConfig};
use crate::graph::{equilibrium, median, Instance};
use crate::intervention::InterventionResult;
use crate::optimize::{projected_huber, sigmoid_gd, OptimizerConfig};
use crate::tree_dp::{tree_dp_min_cost, TreeInstance};

/// Resolution of the L1 budget search for continuous methods.
pub const L1_RESOLUTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Huber,
    Sigmoid,
    Greedy,
    GreedyScore,
    Random,
    Degree,
    Centrality,
    TreeDp,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Huber,
        Method::Sigmoid,
        Method::Greedy,
        Method::GreedyScore,
        Method::Random,
        Method::Degree,
        Method::Centrality,
        Method::TreeDp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Huber => "huber",
            Method::Sigmoid => "sigmoid",
            Method::Greedy => "greedy",
            Method::GreedyScore => "greedy-score",
            Method::Random => "random",
            Method::Degree => "degree",
            Method::Centrality => "centrality",
            Method::TreeDp => "tree-dp",
        }
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, Method::Huber | Method::Sigmoid)
    }

    /// Whether the outcome depends on the seed.
    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Huber | Method::Random)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::invalid(format!("unknown method '{s}', expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodParams {
    /// Laziness of the greedy scan.
    pub phi: f64,
    pub seed: u64,
    /// Ascent settings; `budget_k` is overwritten from the stooge budget.
    pub optimizer: OptimizerConfig,
    /// Huber constant; chosen by `find_c` when absent.
    pub huber_c: Option<f64>,
    pub find_c: FindCConfig,
    /// Multiples of the Huber constant to try; the run with the highest
    /// final median wins.
    pub huber_c_scales: Vec<f64>,
    pub sigmoid_tau: f64,
    pub score: ScoreParams,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            phi: 0.8,
            seed: 0,
            optimizer: OptimizerConfig::default(),
            huber_c: None,
            find_c: FindCConfig::default(),
            huber_c_scales: vec![0.5, 1.0, 2.0],
            sigmoid_tau: 25.0,
            score: ScoreParams::default(),
        }
    }
}

impl MethodParams {
    /// The Huber constant to use on `instance`.
    pub fn resolve_c(&self, instance: &Instance) -> Result<f64> {
        match self.huber_c {
            Some(c) => Ok(c),
            None => {
                let config = FindCConfig {
                    seed: self.seed,
                    ..self.find_c.clone()
                };
                let c = find_c(instance, &config)?.c;
                log::info!("find_c chose c = {c}");
                Ok(c)
            }
        }
    }
}

fn stooge_count(instance: &Instance, budget: f64) -> Result<usize> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::invalid(format!("budget must be a non-negative number, got {budget}")));
    }
    Ok((budget.floor() as usize).min(instance.node_count()))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::OutOfUnitRange {
            what: "theta".into(),
            value: theta,
        });
    }
    Ok(())
}

fn unchanged(instance: &Instance, theta: f64) -> Result<InterventionResult> {
    let x = equilibrium(instance)?.x_star;
    Ok(InterventionResult::from_alpha(
        instance.alpha(),
        instance.alpha().to_vec(),
        median(&x)?,
        theta,
    ))
}

/// Runs `method` with a budget of `budget` stooges.
pub fn run_method(
    instance: &Instance,
    method: Method,
    budget: f64,
    theta: f64,
    params: &MethodParams,
) -> Result<InterventionResult> {
    check_theta(theta)?;
    let k = stooge_count(instance, budget)?;
    let optimizer = OptimizerConfig {
        budget_k: budget / 2.0,
        ..params.optimizer
    };
    match method {
        Method::Huber => {
            let c = params.resolve_c(instance)?;
            if params.huber_c_scales.is_empty() || params.huber_c_scales.iter().any(|&f| !(f > 0.0)) {
                return Err(Error::invalid("Huber constant scales must be nonempty and positive"));
            }
            let mut best: Option<InterventionResult> = None;
            for &f in &params.huber_c_scales {
                let r = projected_huber(instance, &optimizer, &HuberConfig::new(c * f), theta)?;
                if best.as_ref().is_none_or(|b| r.final_median > b.final_median) {
                    best = Some(r);
                }
            }
            Ok(best.expect("nonempty scales"))
        }
        Method::Sigmoid => sigmoid_gd(instance, &optimizer, &SigmoidConfig::new(theta, params.sigmoid_tau)),
        Method::Greedy => lazy_greedy(instance, k, params.phi, &GainFunction::Median, theta),
        Method::GreedyScore => lazy_greedy(instance, k, params.phi, &GainFunction::Score(params.score), theta),
        Method::Random => baseline_select(instance, k, BaselineKind::Random, theta, params.seed),
        Method::Degree => baseline_select(instance, k, BaselineKind::MaxDegree, theta, params.seed),
        Method::Centrality => baseline_select(instance, k, BaselineKind::Centrality, theta, params.seed),
        Method::TreeDp => run_tree_dp(instance, k, theta),
    }
}

/// Exact resistance-only solution on a hierarchy. Leaves are normalized to
/// `alpha = 1` first; the result is reported against the normalized
/// resistances. When the optimum exceeds the budget nothing is changed.
fn run_tree_dp(instance: &Instance, k: usize, theta: f64) -> Result<InterventionResult> {
    let tree = TreeInstance::new(instance.clone())?;
    let n = tree.node_count();
    let outcome = tree_dp_min_cost(&tree, theta, n - n / 2)?;
    let alpha0 = tree.instance().alpha();
    match outcome.solution {
        Some(sol) if sol.cost <= k => {
            let alpha = sol.resistances(alpha0);
            let mut result = InterventionResult::from_alpha(alpha0, alpha, median(&sol.opinions)?, theta);
            result.stooges = sol
                .stooges()
                .into_iter()
                .map(|u| (u, result.alpha_final[u]))
                .collect();
            result.l0_budget_used = sol.cost;
            Ok(result)
        }
        _ => unchanged(tree.instance(), theta),
    }
}

/// Smallest budget at which a method flips the median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipSearch {
    /// In stooges; `None` when the median does not flip within the maximum budget.
    pub budget: Option<f64>,
    /// For continuous methods, the L1 budget at `budget`.
    pub l1_budget: Option<f64>,
    /// The successful run, if one was needed.
    pub result: Option<InterventionResult>,
    /// Number of method runs performed.
    pub runs: usize,
}

impl FlipSearch {
    fn found(budget: f64, result: Option<InterventionResult>, runs: usize) -> Self {
        FlipSearch {
            budget: Some(budget),
            l1_budget: None,
            result,
            runs,
        }
    }

    fn not_found(runs: usize) -> Self {
        FlipSearch {
            budget: None,
            l1_budget: None,
            result: None,
            runs,
        }
    }
}

/// Searches for the least budget (in stooges, up to `max_budget`) that
/// lifts the median above `theta`.
///
/// Heuristic success need not be monotone in the budget, so discrete
/// methods scan budgets upward one stooge at a time (greedy does this in a
/// single run, since its first `k` choices do not depend on the budget).
/// Continuous methods bisect the L1 budget to a resolution of 1/4.
pub fn min_budget_to_flip(
    instance: &Instance,
    method: Method,
    theta: f64,
    max_budget: f64,
    params: &MethodParams,
) -> Result<FlipSearch> {
    check_theta(theta)?;
    let max_k = stooge_count(instance, max_budget)?;
    if method != Method::TreeDp {
        let x = equilibrium(instance)?.x_star;
        if median(&x)? > theta {
            return Ok(FlipSearch::found(0.0, None, 0));
        }
    }
    match method {
        Method::Greedy | Method::GreedyScore => {
            let r = run_method(instance, method, max_k as f64, theta, params)?;
            Ok(if r.flipped {
                FlipSearch::found(r.stooges.len() as f64, Some(r), 1)
            } else {
                FlipSearch::not_found(1)
            })
        }
        Method::Random | Method::Degree | Method::Centrality => {
            for k in 1..=max_k {
                let r = run_method(instance, method, k as f64, theta, params)?;
                if r.flipped {
                    return Ok(FlipSearch::found(k as f64, Some(r), k));
                }
            }
            Ok(FlipSearch::not_found(max_k))
        }
        Method::TreeDp => {
            let r = run_method(instance, method, max_k as f64, theta, params)?;
            Ok(if r.flipped {
                FlipSearch::found(r.l0_budget_used as f64, Some(r), 1)
            } else {
                FlipSearch::not_found(1)
            })
        }
        Method::Huber | Method::Sigmoid => {
            let mut params = params.clone();
            params.optimizer.stop_on_flip = true;
            if method == Method::Huber {
                params.huber_c = Some(params.resolve_c(instance)?);
            }
            let run = |l1: f64| run_method(instance, method, 2.0 * l1, theta, &params);
            let mut runs = 1;
            let mut hi = max_budget / 2.0;
            let mut best = run(hi)?;
            if !best.flipped {
                return Ok(FlipSearch::not_found(runs));
            }
            let mut lo = 0.0;
            while hi - lo > L1_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let r = run(mid)?;
                runs += 1;
                if r.flipped {
                    hi = mid;
                    best = r;
                } else {
                    lo = mid;
                }
            }
            Ok(FlipSearch {
                l1_budget: Some(hi),
                ..FlipSearch::found(2.0 * hi, Some(best), runs)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Network;
    use crate::instances::stalling_component;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn already_flipped_needs_no_budget() {
        let net = Network::new(1, vec![], true).unwrap();
        let inst = Instance::new(net, vec![1.0], vec![0.7]).unwrap();
        for m in [Method::Greedy, Method::Random, Method::Huber] {
            let f = min_budget_to_flip(&inst, m, 0.5, 1.0, &MethodParams::default()).unwrap();
            assert_eq!(f.budget, Some(0.0));
        }
    }

    #[test]
    fn single_node_greedy_needs_one_stooge() {
        let net = Network::new(1, vec![], true).unwrap();
        let inst = Instance::new(net, vec![0.5], vec![0.6]).unwrap();
        let f = min_budget_to_flip(&inst, Method::Greedy, 0.5, 1.0, &MethodParams::default()).unwrap();
        assert_eq!(f.budget, Some(1.0));
        let f = min_budget_to_flip(&inst, Method::TreeDp, 0.5, 1.0, &MethodParams::default()).unwrap();
        assert_eq!(f.budget, Some(0.0));
    }

    #[test]
    fn stalling_component_cannot_flip() {
        let inst = stalling_component(0).unwrap();
        let params = MethodParams {
            huber_c: Some(0.01),
            ..MethodParams::default()
        };
        for m in [Method::Greedy, Method::Random, Method::Degree, Method::Centrality, Method::Huber] {
            let f = min_budget_to_flip(&inst, m, 0.5, 8.0, &params).unwrap();
            assert_eq!(f.budget, None, "{m}");
        }
    }

    #[test]
    fn tree_dp_rejects_non_trees() {
        let net = Network::unweighted(3, &[(0, 1), (1, 2)], false).unwrap();
        let inst = Instance::uniform(net, 0.5, vec![0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            run_method(&inst, Method::TreeDp, 1.0, 0.5, &MethodParams::default()),
            Err(Error::NotHierarchy(_))
        ));
    }
}
