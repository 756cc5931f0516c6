//! Analytic gradients with respect to the resistances.
//!
//! Differentiating `X x* = A s` in `alpha_k` gives
//! `∂x*/∂alpha_k = X⁻¹ e_k (s_k - (W x*)_k)`, so for any weight vector `v`
//! `(∂x*/∂alpha)ᵀ v = Diag(s - W x*) X⁻ᵀ v`. The product is formed with one
//! least-squares solve against `Xᵀ`; the Jacobian itself is never built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{huber_m_estimate, huber_members, HuberConfig, SigmoidConfig};
use crate::graph::{equilibrium_with, FjOperator, Instance, SolverOptions};

/// `(∂x*/∂alpha)ᵀ v` at a known equilibrium `x_star`.
pub fn jacobian_action_at(
    instance: &Instance,
    x_star: &[f64],
    v: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let n = instance.node_count();
    if v.len() != n || x_star.len() != n {
        return Err(Error::invalid("Jacobian action needs vectors of length n"));
    }
    let op = FjOperator {
        net: instance.network(),
        alpha: instance.alpha(),
    };
    let (z, _, _) = op.least_squares(true, v, opts)?;
    let wx = instance.network().influence_mul(x_star);
    Ok(instance
        .s()
        .iter()
        .zip(&wx)
        .zip(&z)
        .map(|((&s, &w), &zu)| (s - w) * zu)
        .collect())
}

/// `(∂x*/∂alpha)ᵀ v`, solving for the equilibrium first.
pub fn equilibrium_jacobian_action(instance: &Instance, v: &[f64]) -> Result<Vec<f64>> {
    let opts = SolverOptions::default();
    let x = equilibrium_with(instance, &opts)?.x_star;
    jacobian_action_at(instance, &x, v, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuberGradient {
    pub gradient: Vec<f64>,
    pub y_hat: f64,
    /// Nodes within the membership radius of `y_hat`.
    pub members: Vec<usize>,
    /// Radius used for membership; `c` unless it had to be widened.
    pub radius: f64,
    /// Number of radius doublings needed to make the membership set nonempty.
    pub expansions: usize,
}

/// Gradient of the M-estimate `y_hat(x*(alpha))` at a known equilibrium.
///
/// `∂y_hat/∂x*_i = 1/|I|` on `I = {i : |x*_i - y_hat| < c}` and zero
/// elsewhere. When `I` is empty the radius is doubled until it is not.
pub fn huber_gradient_at(
    instance: &Instance,
    x_star: &[f64],
    config: &HuberConfig,
    opts: &SolverOptions,
) -> Result<HuberGradient> {
    let y_hat = huber_m_estimate(x_star, config)?;
    let mut radius = config.c;
    let mut expansions = 0;
    let mut members = huber_members(x_star, y_hat, radius);
    while members.is_empty() {
        radius *= 2.0;
        expansions += 1;
        members = huber_members(x_star, y_hat, radius);
    }
    if expansions > 0 {
        log::debug!("Huber membership set empty at c = {}, widened {expansions} times", config.c);
    }
    let weight = 1.0 / members.len() as f64;
    let mut indicator = vec![0.0; x_star.len()];
    for &i in &members {
        indicator[i] = weight;
    }
    let gradient = jacobian_action_at(instance, x_star, &indicator, opts)?;
    Ok(HuberGradient {
        gradient,
        y_hat,
        members,
        radius,
        expansions,
    })
}

pub fn huber_gradient(instance: &Instance, config: &HuberConfig) -> Result<HuberGradient> {
    huber_gradient_with(instance, config, &SolverOptions::default())
}

pub fn huber_gradient_with(
    instance: &Instance,
    config: &HuberConfig,
    opts: &SolverOptions,
) -> Result<HuberGradient> {
    let x = equilibrium_with(instance, opts)?.x_star;
    huber_gradient_at(instance, &x, config, opts)
}

/// Gradient of `sum_u sigmoid(x*_u)` at a known equilibrium.
///
/// The chain rule weights each node by the sigmoid slope
/// `tau * sigma_u (1 - sigma_u)`.
pub fn sigmoid_gradient_at(
    instance: &Instance,
    x_star: &[f64],
    config: &SigmoidConfig,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    config.validate()?;
    let slopes: Vec<f64> = x_star.iter().map(|&x| config.derivative(x)).collect();
    jacobian_action_at(instance, x_star, &slopes, opts)
}

pub fn sigmoid_gradient(instance: &Instance, config: &SigmoidConfig) -> Result<Vec<f64>> {
    sigmoid_gradient_with(instance, config, &SolverOptions::default())
}

pub fn sigmoid_gradient_with(
    instance: &Instance,
    config: &SigmoidConfig,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let x = equilibrium_with(instance, opts)?.x_star;
    sigmoid_gradient_at(instance, &x, config, opts)
}
