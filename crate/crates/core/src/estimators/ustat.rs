//! Pairwise U-statistics for block energies.
//!
//! With `u_j(l)` and `v_j(l)` per-row terms for frequency `j`, the block
//! statistic is `2/(m(m-1)) sum_{l1<l2} L^{-1} sum_{j in B} u_j(l1) v_j(l2)`.
//! The ordered pair sum is computed with a running prefix in `O(m)`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::function_space::phi;

/// `sum_{l1 < l2} u[l1] v[l2]`.
pub fn ordered_pair_sum(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut prefix = 0.0;
    let mut acc = 0.0;
    for (a, b) in u.iter().zip(v) {
        acc += prefix * b;
        prefix += a;
    }
    acc
}

/// Block statistic from per-frequency row terms; `first[j]` and `second[j]`
/// hold one value per row.
pub fn block_ustat(first: &[Vec<f64>], second: &[Vec<f64>]) -> Result<f64> {
    if first.is_empty() || first.len() != second.len() {
        return Err(Error::InvalidParameter(
            "block needs matching row terms".into(),
        ));
    }
    let m = first[0].len();
    if m < 2 {
        return Err(Error::InsufficientData(format!(
            "U-statistic needs at least 2 rows, got {m}"
        )));
    }
    let pairs = (m * (m - 1)) as f64 / 2.0;
    let total: f64 = first
        .iter()
        .zip(second)
        .map(|(u, v)| ordered_pair_sum(u, v))
        .sum();
    Ok(total / (pairs * first.len() as f64))
}

/// Symmetric block energy estimate with `weighted[l] = Y_l / p(X_l, Z_l)`.
pub fn big_theta_hat(x: &[f64], weighted: &[f64], block: Range<usize>) -> Result<f64> {
    if x.len() != weighted.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: weighted.len(),
        });
    }
    let terms: Vec<Vec<f64>> = block
        .map(|j| {
            x.iter()
                .zip(weighted)
                .map(|(&xl, &w)| w * phi(j, xl))
                .collect()
        })
        .collect();
    block_ustat(&terms, &terms)
}

/// Direct double loop over pairs; reference for [`big_theta_hat`].
pub fn big_theta_hat_pairs(x: &[f64], weighted: &[f64], block: Range<usize>) -> Result<f64> {
    let m = x.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!(
            "U-statistic needs at least 2 rows, got {m}"
        )));
    }
    let len = block.len() as f64;
    let mut acc = 0.0;
    for l1 in 0..m {
        for l2 in l1 + 1..m {
            let s: f64 = block
                .clone()
                .map(|j| weighted[l1] * weighted[l2] * phi(j, x[l1]) * phi(j, x[l2]))
                .sum();
            acc += s / len;
        }
    }
    Ok(2.0 * acc / (m * (m - 1)) as f64)
}
