//! Huber loss and M-estimator, the `find_c` tuning heuristic, and the
//! sigmoid threshold objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{equilibrium_with, median, Instance, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberConfig {
    /// Tuning constant: the loss is quadratic for residuals up to `c`.
    pub c: f64,
    pub inner_tol: f64,
    pub max_inner_iters: usize,
}

impl HuberConfig {
    pub fn new(c: f64) -> Self {
        HuberConfig {
            c,
            inner_tol: 1e-10,
            max_inner_iters: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::invalid(format!("Huber constant c = {} must be positive", self.c)));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::invalid("inner_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidConfig {
    pub theta: f64,
    /// Temperature; larger values sharpen the step at `theta`.
    pub tau: f64,
}

impl SigmoidConfig {
    pub fn new(theta: f64, tau: f64) -> Self {
        SigmoidConfig { theta, tau }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.theta.is_finite() {
            return Err(Error::invalid(format!(
                "sigmoid needs tau > 0 and finite theta, got tau = {}, theta = {}",
                self.tau, self.theta
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        1.0 / (1.0 + (self.tau * (self.theta - x)).exp())
    }

    /// `d sigmoid / dx = tau * sigma * (1 - sigma)`.
    pub fn derivative(&self, x: f64) -> f64 {
        let sig = self.value(x);
        self.tau * sig * (1.0 - sig)
    }
}

impl Default for SigmoidConfig {
    fn default() -> Self {
        SigmoidConfig::new(0.5, 25.0)
    }
}

pub fn huber_loss(x: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::invalid(format!("Huber constant c = {c} must be positive")));
    }
    let a = x.abs();
    Ok(if a <= c { 0.5 * x * x } else { c * (a - 0.5 * c) })
}

/// `sum_i psi_c(x_i - y)` with `psi_c` the clipped residual; nonincreasing in `y`.
fn clipped_residual_sum(x: &[f64], y: f64, c: f64) -> f64 {
    x.iter().map(|&xi| (xi - y).clamp(-c, c)).sum()
}

/// Indices `i` with `|x_i - y| < radius`.
pub fn huber_members(x: &[f64], y: f64, radius: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &xi)| (xi - y).abs() < radius)
        .map(|(i, _)| i)
        .collect()
}

/// Right-hand side of the stationarity identity
/// `y = (c * sum_{i not in I} sgn(x_i - y) + sum_{i in I} x_i) / |I|`,
/// or `None` when `I` is empty.
pub fn huber_fixed_point(x: &[f64], y: f64, c: f64) -> Option<f64> {
    let mut count = 0usize;
    let mut acc = 0.0;
    for &xi in x {
        let r = xi - y;
        if r.abs() < c {
            count += 1;
            acc += xi;
        } else {
            acc += c * r.signum();
        }
    }
    (count > 0).then(|| acc / count as f64)
}

/// Huber's M-estimate `argmin_y sum_i H_c(x_i - y)`.
///
/// The objective is convex in `y`, so its derivative `-sum psi_c(x_i - y)` is
/// monotone and the minimizer is bracketed by `[min x, max x]`. The bracket is
/// bisected on the sign of the derivative, then polished with the closed-form
/// stationarity identity on the final membership set.
pub fn huber_m_estimate(x: &[f64], config: &HuberConfig) -> Result<f64> {
    config.validate()?;
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let c = config.c;
    let mut lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(lo);
    }
    let mut iters = 0;
    while hi - lo > config.inner_tol {
        if iters == config.max_inner_iters {
            return Err(Error::NotConverged {
                iterations: iters,
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        let g = clipped_residual_sum(x, mid, c);
        if g > 0.0 {
            lo = mid;
        } else if g < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
        iters += 1;
    }
    let mid = 0.5 * (lo + hi);
    if let Some(y) = huber_fixed_point(x, mid, c) {
        let slack = config.inner_tol;
        if y >= lo - slack
            && y <= hi + slack
            && huber_members(x, y, c) == huber_members(x, mid, c)
        {
            return Ok(y);
        }
    }
    Ok(mid)
}

/// How `find_c` perturbs resistances and opinions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    /// Every entry moves by exactly `+epsilon` or `-epsilon`.
    #[default]
    Sign,
    /// Every entry moves by a uniform draw from `[-epsilon, epsilon]`.
    Uniform,
}

/// Which median the perturbed M-estimates are scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MedianReference {
    /// The median of the unperturbed equilibrium.
    #[default]
    Original,
    /// The median of each perturbed equilibrium.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindCConfig {
    pub epsilon: f64,
    pub trials: usize,
    pub candidates: Vec<f64>,
    pub seed: u64,
    pub perturbation: Perturbation,
    pub reference: MedianReference,
}

impl Default for FindCConfig {
    fn default() -> Self {
        FindCConfig {
            epsilon: 0.05,
            trials: 10,
            candidates: log_grid(1e-4, 1.0, 25),
            seed: 0,
            perturbation: Perturbation::Sign,
            reference: MedianReference::Original,
        }
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindCOutcome {
    pub c: f64,
    /// Trial-averaged `|y_c - median|` per candidate, in candidate order.
    pub mean_errors: Vec<f64>,
    pub trials_used: usize,
}

/// Derives an independent per-trial seed from a master seed.
pub(crate) fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Picks the candidate `c` whose M-estimate best tracks the median across samples.
///
/// Each sample is scored against `reference` when given, else against its
/// own median. Ties go to the smaller candidate.
pub fn select_c(
    samples: &[Vec<f64>],
    candidates: &[f64],
    reference: Option<f64>,
) -> Result<FindCOutcome> {
    if candidates.is_empty() {
        return Err(Error::invalid("find_c needs at least one candidate"));
    }
    if samples.is_empty() {
        return Err(Error::invalid("find_c needs at least one sample"));
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].total_cmp(&candidates[b]));

    let mut mean_errors = vec![0.0; candidates.len()];
    for x in samples {
        let med = match reference {
            Some(m) => m,
            None => median(x)?,
        };
        for (slot, &c) in mean_errors.iter_mut().zip(candidates) {
            let y = huber_m_estimate(x, &HuberConfig::new(c))?;
            *slot += (y - med).abs();
        }
    }
    for e in &mut mean_errors {
        *e /= samples.len() as f64;
    }
    let best = order
        .iter()
        .copied()
        .fold(None::<usize>, |best, i| match best {
            Some(b) if mean_errors[b] <= mean_errors[i] => Some(b),
            _ => Some(i),
        })
        .expect("nonempty candidates");
    Ok(FindCOutcome {
        c: candidates[best],
        mean_errors,
        trials_used: samples.len(),
    })
}

/// Chooses the Huber constant by perturbing the instance and comparing
/// M-estimates with the true median of each perturbed equilibrium.
pub fn find_c(instance: &Instance, config: &FindCConfig) -> Result<FindCOutcome> {
    if !(config.epsilon > 0.0) {
        return Err(Error::invalid("find_c epsilon must be positive"));
    }
    if config.trials == 0 {
        return Err(Error::invalid("find_c needs at least one trial"));
    }
    if config.candidates.is_empty() || config.candidates.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::invalid("find_c candidates must be nonempty and positive"));
    }
    let samples: Vec<Option<Vec<f64>>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, trial as u64));
            let mut shift = |v: f64| -> f64 {
                let delta = match config.perturbation {
                    Perturbation::Sign => {
                        if rng.random::<bool>() {
                            config.epsilon
                        } else {
                            -config.epsilon
                        }
                    }
                    Perturbation::Uniform => rng.random_range(-config.epsilon..=config.epsilon),
                };
                (v + delta).clamp(0.0, 1.0)
            };
            let alpha: Vec<f64> = instance.alpha().iter().map(|&a| shift(a)).collect();
            let s: Vec<f64> = instance.s().iter().map(|&v| shift(v)).collect();
            let perturbed = instance.with_alpha(alpha).and_then(|i| i.with_opinions(s));
            match perturbed.and_then(|p| equilibrium_with(&p, &SolverOptions::default())) {
                Ok(sol) => Some(sol.x_star),
                Err(err) => {
                    log::warn!("find_c trial {trial} skipped: {err}");
                    None
                }
            }
        })
        .collect();
    let samples: Vec<Vec<f64>> = samples.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::NotConverged {
            iterations: config.trials,
            residual: f64::NAN,
        });
    }
    let reference = match config.reference {
        MedianReference::Original => {
            Some(median(&equilibrium_with(instance, &SolverOptions::default())?.x_star)?)
        }
        MedianReference::Perturbed => None,
    };
    select_c(&samples, &config.candidates, reference)
}

/// `sum_u 1 / (1 + exp(tau (theta - x_u)))`.
pub fn sigmoid_objective(x: &[f64], config: &SigmoidConfig) -> Result<f64> {
    config.validate()?;
    Ok(x.iter().map(|&xu| config.value(xu)).sum())
}
