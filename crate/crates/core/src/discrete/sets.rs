use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// The `k` nodes whose resistance moved furthest from `alpha0`, ties by id.
pub fn round_to_stooges(alpha: &[f64], alpha0: &[f64], k: usize) -> Result<Vec<usize>> {
    if alpha.len() != alpha0.len() {
        return Err(Error::invalid("resistance vectors differ in length"));
    }
    if k > alpha.len() {
        return Err(Error::invalid(format!(
            "cannot pick {k} stooges from {} nodes",
            alpha.len()
        )));
    }
    let dev: Vec<f64> = alpha.iter().zip(alpha0).map(|(a, b)| (a - b).abs()).collect();
    let mut ids: Vec<usize> = (0..alpha.len()).collect();
    ids.sort_by(|&a, &b| dev[b].total_cmp(&dev[a]).then(a.cmp(&b)));
    ids.truncate(k);
    Ok(ids)
}

/// `|U1 ∩ U2| / |U1 ∪ U2|`; two empty sets count as identical.
pub fn jaccard(u1: &[usize], u2: &[usize]) -> f64 {
    let a: BTreeSet<usize> = u1.iter().copied().collect();
    let b: BTreeSet<usize> = u2.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        log::debug!("Jaccard index of two empty sets taken as 1");
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}
