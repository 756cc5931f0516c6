//! Equilibrium of the generalized FJ dynamics.
//!
//! The equilibrium `x*` solves `X x = A s` with `X = I - (I - A) W` and
//! `A = Diag(alpha)`. It is computed as the least-squares problem
//! `min_x ||X x - A s||_2` with CGLS (conjugate gradients on the normal
//! equations), which only needs products with `X` and `Xᵀ` and therefore
//! never forms `X` or its inverse. Products with `Xᵀ` also serve the
//! gradient code, which solves `min_z ||Xᵀ z - v||_2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, Network};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the residual falls below `tol * max(1, ||b||)`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iters: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iters: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Self::default()
        }
    }

    fn cap(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(10 * n).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub x_star: Vec<f64>,
    /// `||X x - A s||_2` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// The operator `X = I - (I - A) W` for fixed resistances.
#[derive(Clone, Copy)]
pub(crate) struct FjOperator<'a> {
    pub net: &'a Network,
    pub alpha: &'a [f64],
}

impl FjOperator<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let wx = self.net.influence_mul(x);
        for u in 0..x.len() {
            out[u] = x[u] - (1.0 - self.alpha[u]) * wx[u];
        }
    }

    fn apply_transpose(&self, z: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = z
            .iter()
            .zip(self.alpha)
            .map(|(&zu, &a)| (1.0 - a) * zu)
            .collect();
        out.fill(0.0);
        self.net.influence_mul_transpose_into(&scaled, out);
        for u in 0..z.len() {
            out[u] = z[u] - out[u];
        }
    }

    fn forward(&self, transposed: bool, x: &[f64], out: &mut [f64]) {
        if transposed {
            self.apply_transpose(x, out)
        } else {
            self.apply(x, out)
        }
    }

    /// Solves `min_y ||M y - b||_2` for `M = X` or `M = Xᵀ`.
    pub fn least_squares(
        &self,
        transposed: bool,
        b: &[f64],
        opts: &SolverOptions,
    ) -> Result<(Vec<f64>, f64, usize)> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let b_norm = norm2(b);
        if b_norm == 0.0 {
            return Ok((x, 0.0, 0));
        }
        let scale = b_norm.max(1.0);
        let target = opts.tol * scale;

        let mut r = b.to_vec();
        let mut s = vec![0.0; n];
        self.forward(!transposed, &r, &mut s);
        let mut p = s.clone();
        let mut gamma = dot(&s, &s);
        let normal_target = opts.tol * gamma.sqrt().max(1.0);
        let mut q = vec![0.0; n];

        let cap = opts.cap(n);
        for iter in 1..=cap {
            self.forward(transposed, &p, &mut q);
            let delta = dot(&q, &q);
            if delta == 0.0 {
                break;
            }
            let step = gamma / delta;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * q[i];
            }
            self.forward(!transposed, &r, &mut s);
            let gamma_next = dot(&s, &s);
            if norm2(&r) <= target || gamma_next.sqrt() <= normal_target * 1e-3 {
                let residual = self.true_residual(transposed, &x, b);
                return Ok((x, residual, iter));
            }
            let beta = gamma_next / gamma;
            gamma = gamma_next;
            for i in 0..n {
                p[i] = s[i] + beta * p[i];
            }
        }
        let residual = self.true_residual(transposed, &x, b);
        if residual <= target {
            return Ok((x, residual, cap));
        }
        Err(Error::NotConverged {
            iterations: cap,
            residual,
        })
    }

    fn true_residual(&self, transposed: bool, x: &[f64], b: &[f64]) -> f64 {
        let mut out = vec![0.0; x.len()];
        self.forward(transposed, x, &mut out);
        out.iter()
            .zip(b)
            .map(|(o, bi)| (o - bi) * (o - bi))
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Equilibrium for explicit resistances and opinions on a shared network.
pub fn equilibrium_for(
    net: &Network,
    alpha: &[f64],
    s: &[f64],
    opts: &SolverOptions,
) -> Result<EquilibriumSolution> {
    let rhs: Vec<f64> = alpha.iter().zip(s).map(|(a, si)| a * si).collect();
    let op = FjOperator { net, alpha };
    let (mut x_star, residual, iterations) = op.least_squares(false, &rhs, opts)?;
    // The exact solution is a convex combination of innate opinions and 0.
    for x in &mut x_star {
        *x = x.clamp(0.0, 1.0);
    }
    Ok(EquilibriumSolution {
        x_star,
        residual,
        iterations,
        converged: true,
    })
}

/// Equilibrium opinions `x*` with default solver options.
pub fn equilibrium(instance: &Instance) -> Result<EquilibriumSolution> {
    equilibrium_with(instance, &SolverOptions::default())
}

pub fn equilibrium_with(instance: &Instance, opts: &SolverOptions) -> Result<EquilibriumSolution> {
    equilibrium_for(instance.network(), instance.alpha(), instance.s(), opts)
}

/// Iterates `x(t+1) = A s + (I - A) W x(t)` from `x(0) = s`.
///
/// Stops when `||x(t+1) - x(t)||_inf < tol` or after `max_rounds`; in the
/// latter case the last iterate is returned with `converged = false`.
pub fn simulate(instance: &Instance, max_rounds: usize, tol: f64) -> Result<EquilibriumSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid("simulation tolerance must be positive"));
    }
    let net = instance.network();
    let alpha = instance.alpha();
    let s = instance.s();
    let mut x = s.to_vec();
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds {
        let wx = net.influence_mul(&x);
        let mut change: f64 = 0.0;
        for u in 0..x.len() {
            let next = alpha[u] * s[u] + (1.0 - alpha[u]) * wx[u];
            change = change.max((next - x[u]).abs());
            x[u] = next;
        }
        rounds += 1;
        if change < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("simulation stopped after {rounds} rounds without converging");
    }
    let op = FjOperator { net, alpha };
    let rhs: Vec<f64> = alpha.iter().zip(s).map(|(a, si)| a * si).collect();
    let residual = op.true_residual(false, &x, &rhs);
    Ok(EquilibriumSolution {
        x_star: x,
        residual,
        iterations: rounds,
        converged,
    })
}
