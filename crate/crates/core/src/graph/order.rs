//! Order statistics of opinion vectors.

use crate::error::{Error, Result};

/// Upper median: the element at 0-indexed position `⌊n/2⌋` of the sorted vector.
pub fn median(x: &[f64]) -> Result<f64> {
    order_statistic(x, x.len() / 2)
}

/// Element at 0-indexed position `⌊q·n⌋` of the sorted vector, for `0 < q < 1`.
pub fn quantile(x: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile level {q} outside (0, 1)")));
    }
    let pos = ((q * x.len() as f64).floor() as usize).min(x.len().saturating_sub(1));
    order_statistic(x, pos)
}

pub fn mean(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    Ok(x.iter().sum::<f64>() / x.len() as f64)
}

fn order_statistic(x: &[f64], pos: usize) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let mut buf = x.to_vec();
    let (_, nth, _) = buf.select_nth_unstable_by(pos, f64::total_cmp);
    Ok(*nth)
}
