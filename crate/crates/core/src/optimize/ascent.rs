//! Projected gradient ascent on the Huber M-estimate and the sigmoid objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{huber_m_estimate, sigmoid_objective, HuberConfig, SigmoidConfig};
use crate::graph::{equilibrium_for, median, Instance, SolverOptions};
use crate::intervention::{l1_distance, InterventionResult, TracePoint};
use crate::optimize::{huber_gradient_at, project_l1_box, sigmoid_gradient_at, AdamState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Maximum number of ascent steps.
    pub max_iters: usize,
    /// Stop once `||alpha change||_inf` falls below this.
    pub converge_tol: f64,
    /// L1 budget around the initial resistances.
    pub budget_k: f64,
    /// Stop as soon as the true median exceeds the threshold.
    #[serde(default)]
    pub stop_on_flip: bool,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            eta: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            max_iters: 500,
            converge_tol: 1e-6,
            budget_k: 0.0,
            stop_on_flip: false,
            solver: SolverOptions::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn with_budget(budget_k: f64) -> Self {
        OptimizerConfig {
            budget_k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::invalid(format!("eta must be positive, got {}", self.eta)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid(format!("{name} must lie in [0,1), got {b}")));
            }
        }
        if !(self.budget_k >= 0.0) {
            return Err(Error::invalid(format!(
                "budget must be non-negative, got {}",
                self.budget_k
            )));
        }
        if !(self.converge_tol >= 0.0) {
            return Err(Error::invalid("converge_tol must be non-negative"));
        }
        Ok(())
    }
}

struct Evaluation {
    surrogate: f64,
    median: f64,
    gradient: Vec<f64>,
}

fn ascend<F>(
    instance: &Instance,
    config: &OptimizerConfig,
    theta: f64,
    mut evaluate: F,
) -> Result<InterventionResult>
where
    F: FnMut(&Instance, &[f64]) -> Result<(f64, Vec<f64>)>,
{
    config.validate()?;
    let alpha0 = instance.alpha();
    let net = instance.network();
    let mut alpha = alpha0.to_vec();
    let mut adam = AdamState::new(alpha.len(), config.beta1, config.beta2);
    let mut trace = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = false;
    let mut steps = 0;

    loop {
        let x = equilibrium_for(net, &alpha, instance.s(), &config.solver)?.x_star;
        let current = instance.with_alpha(alpha.clone())?;
        let (surrogate, gradient) = evaluate(&current, &x)?;
        let eval = Evaluation {
            surrogate,
            median: median(&x)?,
            gradient,
        };
        trace.push(TracePoint {
            iteration: steps,
            surrogate: eval.surrogate,
            true_median: eval.median,
            l1_used: l1_distance(&alpha, alpha0),
        });
        if best.as_ref().is_none_or(|(_, m)| eval.median > *m) {
            best = Some((alpha.clone(), eval.median));
        }
        if converged || steps == config.max_iters {
            break;
        }
        if config.stop_on_flip && eval.median > theta {
            converged = true;
            break;
        }

        let previous = alpha.clone();
        adam.step(&mut alpha, &eval.gradient, config.eta);
        alpha = project_l1_box(&alpha, alpha0, config.budget_k)?;
        steps += 1;
        let change = alpha
            .iter()
            .zip(&previous)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if change < config.converge_tol {
            converged = true;
        }
    }

    if !converged {
        log::debug!(
            "projected ascent stopped after {} steps without converging",
            config.max_iters
        );
    }
    let (alpha_best, best_median) = best.expect("at least one evaluation");
    let mut result = InterventionResult::from_alpha(alpha0, alpha_best, best_median, theta);
    result.objective_trace = trace;
    result.converged = converged;
    result.iterations = steps;
    Ok(result)
}

/// Projected gradient ascent on the Huber M-estimate of the equilibrium.
///
/// Returns the iterate with the largest true median.
pub fn projected_huber(
    instance: &Instance,
    config: &OptimizerConfig,
    huber: &HuberConfig,
    theta: f64,
) -> Result<InterventionResult> {
    huber.validate()?;
    ascend(instance, config, theta, |inst, x| {
        let g = huber_gradient_at(inst, x, huber, &config.solver)?;
        Ok((g.y_hat, g.gradient))
    })
}

/// Projected gradient ascent on `sum_u sigmoid(x*_u)`; the threshold is `sig.theta`.
pub fn sigmoid_gd(
    instance: &Instance,
    config: &OptimizerConfig,
    sig: &SigmoidConfig,
) -> Result<InterventionResult> {
    sig.validate()?;
    ascend(instance, config, sig.theta, |inst, x| {
        let value = sigmoid_objective(x, sig)?;
        let g = sigmoid_gradient_at(inst, x, sig, &config.solver)?;
        Ok((value, g))
    })
}

/// The Huber M-estimate of the equilibrium, for reporting alongside the median.
pub fn equilibrium_m_estimate(instance: &Instance, huber: &HuberConfig) -> Result<f64> {
    let x = equilibrium_for(
        instance.network(),
        instance.alpha(),
        instance.s(),
        &SolverOptions::default(),
    )?
    .x_star;
    huber_m_estimate(&x, huber)
}
