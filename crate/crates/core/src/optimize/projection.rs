//! Euclidean projection onto `{alpha in [0,1]^n : ||alpha - alpha0||_1 <= k}`.
//!
//! The KKT conditions give the solution coordinate-wise as a soft threshold of
//! `d = alpha' - alpha0` at a common level `lambda`, clipped to the box:
//! `alpha_i = alpha0_i + sign(d_i) min(max(|d_i| - lambda, 0), u_i)` with
//! `u_i = 1 - alpha0_i` for upward moves and `alpha0_i` for downward ones.
//! The budget used is non-increasing in `lambda`, so `lambda` is found by
//! bisection.

use crate::error::{Error, Result};

const BISECTION_STEPS: usize = 200;

/// Projects `alpha_prime` onto the L1 ball of radius `k` around `alpha0`
/// intersected with the unit box.
///
/// Feasible inputs are returned unchanged and `k = 0` returns `alpha0`.
pub fn project_l1_box(alpha_prime: &[f64], alpha0: &[f64], k: f64) -> Result<Vec<f64>> {
    if alpha_prime.len() != alpha0.len() {
        return Err(Error::invalid("projection vectors differ in length"));
    }
    if !(k >= 0.0) {
        return Err(Error::invalid(format!("L1 budget must be non-negative, got {k}")));
    }
    if alpha0.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::invalid("alpha0 must lie in [0,1]"));
    }
    if k == 0.0 {
        return Ok(alpha0.to_vec());
    }

    let boxed: Vec<f64> = alpha_prime.iter().map(|a| a.clamp(0.0, 1.0)).collect();
    let used: f64 = boxed.iter().zip(alpha0).map(|(a, b)| (a - b).abs()).sum();
    if used <= k {
        return Ok(boxed);
    }

    // The threshold acts on the raw difference; the box only caps the step.
    let d: Vec<f64> = alpha_prime.iter().zip(alpha0).map(|(a, b)| a - b).collect();
    let cap = |i: usize| if d[i] > 0.0 { 1.0 - alpha0[i] } else { alpha0[i] };
    let step = |i: usize, lambda: f64| (d[i].abs() - lambda).clamp(0.0, cap(i));
    let spend = |lambda: f64| -> f64 { (0..d.len()).map(|i| step(i, lambda)).sum() };

    let mut lo = 0.0;
    let mut hi = d.iter().fold(0.0_f64, |m, di| m.max(di.abs()));
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    Ok((0..d.len())
        .map(|i| (alpha0[i] + step(i, hi).copysign(d[i])).clamp(0.0, 1.0))
        .collect())
}
