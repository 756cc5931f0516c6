use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{equilibrium_for, median, Instance, SolverOptions};

/// Parameters of the thresholded score used by the score gain.
///
/// `score(o) = max_score` for `o >= pivot`, otherwise
/// `min(scale / (pivot - o), max_score / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub max_score: f64,
    pub scale: f64,
    pub pivot: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            max_score: 10_000.0,
            scale: 50.0,
            pivot: 0.5,
        }
    }
}

impl ScoreParams {
    pub fn score(&self, o: f64) -> f64 {
        if o >= self.pivot {
            self.max_score
        } else {
            (self.scale / (self.pivot - o)).min(self.max_score / 2.0)
        }
    }
}

/// Objective whose increase the greedy maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainFunction {
    #[default]
    Median,
    Score(ScoreParams),
}

impl GainFunction {
    pub fn score() -> Self {
        GainFunction::Score(ScoreParams::default())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GainFunction::Median => Ok(()),
            GainFunction::Score(p) => {
                if !(p.max_score > 0.0) || !(p.scale > 0.0) || !p.pivot.is_finite() {
                    return Err(Error::invalid(format!("invalid score parameters {p:?}")));
                }
                Ok(())
            }
        }
    }

    /// Objective value of an equilibrium vector.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        match self {
            GainFunction::Median => median(x),
            GainFunction::Score(p) => Ok(x.iter().map(|&o| p.score(o)).sum()),
        }
    }
}

/// Gain of setting `alpha_u = r` on top of `alpha`, given the objective at `alpha`.
pub(crate) fn gain_at(
    instance: &Instance,
    alpha: &[f64],
    base: f64,
    u: usize,
    r: f64,
    gain: &GainFunction,
    opts: &SolverOptions,
) -> Result<f64> {
    if alpha[u] == r {
        return Ok(0.0);
    }
    let mut changed = alpha.to_vec();
    changed[u] = r;
    let x = equilibrium_for(instance.network(), &changed, instance.s(), opts)?.x_star;
    Ok(gain.objective(&x)? - base)
}

/// `f(alpha with alpha_u = r) - f(alpha)` for the chosen objective.
pub fn marginal_gain(instance: &Instance, u: usize, r: f64, gain: &GainFunction) -> Result<f64> {
    let n = instance.node_count();
    if u >= n {
        return Err(Error::NodeOutOfRange { id: u, n });
    }
    if r != 0.0 && r != 1.0 {
        return Err(Error::invalid(format!("stooge resistance must be 0 or 1, got {r}")));
    }
    gain.validate()?;
    let opts = SolverOptions::default();
    let x = equilibrium_for(instance.network(), instance.alpha(), instance.s(), &opts)?.x_star;
    let base = gain.objective(&x)?;
    gain_at(instance, instance.alpha(), base, u, r, gain, &opts)
}
