//! Reference implementations used to cross-check the fast paths.
//!
//! These are deliberately literal: they materialize every level of the
//! tree and apply definitions term by term.

use crate::cascade::{Cascade, TailRule};
use crate::error::{Error, Result};
use crate::path::DyadicPath;

/// `#S_r` by enumerating every interval of levels `1..=K`.
///
/// Counts `I_𝐢` meeting the cells with `|f(I_𝐢)| < r ≤ |f(I_{𝐢⁻})|`, plus
/// level-`K` intervals meeting the cells with `|f(I_𝐢)| ≥ r`. Returns 1 when
/// `r` is at least the total mass. Unit tails only; `K ≤ 24`.
pub fn literal_stopping_count(c: &Cascade, cells: &[u64], r: f64) -> Result<u64> {
    if c.config().tail != TailRule::Unit {
        return Err(Error::Domain(
            "literal oracle supports unit tails only".into(),
        ));
    }
    let depth = c.depth();
    if depth > 24 {
        return Err(Error::Resource(
            "literal oracle is limited to K ≤ 24".into(),
        ));
    }
    // log-products, level by level from the root
    let mut logs: Vec<Vec<f64>> = vec![vec![0.0]];
    for k in 1..=depth {
        let prev = &logs[k as usize - 1];
        let level: Vec<f64> = (0..(1u64 << k))
            .map(|i| {
                prev[(i >> 1) as usize] + c.log2_weight(DyadicPath::new(i, k).expect("in range"))
            })
            .collect();
        logs.push(level);
    }
    let mut masses: Vec<Vec<f64>> = vec![Vec::new(); depth as usize + 1];
    masses[depth as usize] = logs[depth as usize]
        .iter()
        .map(|lp| (lp - f64::from(depth)).exp2())
        .collect();
    for k in (0..depth as usize).rev() {
        let finer = &masses[k + 1];
        masses[k] = (0..finer.len() / 2)
            .map(|i| finer[2 * i] + finer[2 * i + 1])
            .collect();
    }
    let mut hit: Vec<Vec<bool>> = vec![Vec::new(); depth as usize + 1];
    let mut leaf_hit = vec![false; 1usize << depth];
    for &cell in cells {
        leaf_hit[cell as usize] = true;
    }
    hit[depth as usize] = leaf_hit;
    for k in (0..depth as usize).rev() {
        let finer = &hit[k + 1];
        hit[k] = (0..finer.len() / 2)
            .map(|i| finer[2 * i] || finer[2 * i + 1])
            .collect();
    }
    if r >= masses[0][0] {
        return Ok(1);
    }
    let mut count = 0u64;
    for k in 1..=depth as usize {
        for i in 0..masses[k].len() {
            if hit[k][i] && masses[k][i] < r && masses[k - 1][i / 2] >= r {
                count += 1;
            }
        }
    }
    let k = depth as usize;
    count += (0..masses[k].len())
        .filter(|&i| hit[k][i] && masses[k][i] >= r)
        .count() as u64;
    Ok(count)
}
