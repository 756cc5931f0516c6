use serde::{Deserialize, Serialize};

/// One iteration of an optimizer: surrogate objective, true median, and budget spent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub surrogate: f64,
    pub true_median: f64,
    pub l1_used: f64,
}

/// Outcome of any intervention method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionResult {
    pub alpha_final: Vec<f64>,
    /// Nodes whose resistance changed, with the new resistance.
    pub stooges: Vec<(usize, f64)>,
    pub l0_budget_used: usize,
    pub l1_budget_used: f64,
    pub objective_trace: Vec<TracePoint>,
    pub final_median: f64,
    pub flipped: bool,
    pub converged: bool,
    pub iterations: usize,
    /// Candidate gains computed per greedy iteration (empty for other methods).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<usize>,
}

impl InterventionResult {
    pub(crate) fn from_alpha(
        alpha0: &[f64],
        alpha_final: Vec<f64>,
        final_median: f64,
        theta: f64,
    ) -> Self {
        let stooges: Vec<(usize, f64)> = alpha_final
            .iter()
            .zip(alpha0)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(u, (&a, _))| (u, a))
            .collect();
        let l1 = l1_distance(&alpha_final, alpha0);
        InterventionResult {
            l0_budget_used: stooges.len(),
            stooges,
            l1_budget_used: l1,
            alpha_final,
            objective_trace: Vec::new(),
            final_median,
            flipped: final_median > theta,
            converged: true,
            iterations: 0,
            evaluations: Vec::new(),
        }
    }

    pub fn stooge_ids(&self) -> Vec<usize> {
        self.stooges.iter().map(|&(u, _)| u).collect()
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
