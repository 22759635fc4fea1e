//! Fejér (Cesàro) means of cosine expansions.
//!
//! In one dimension the order-`b` mean is
//! `b^{-1} sum_{t<b} S_t f = sum_{j<b} (1 - j/b) theta_j phi_j`, a convolution
//! with a nonnegative kernel, so the output stays within the range of `f`.
//! For several variables the default is the tensor product of univariate
//! means, weight `prod_a (1 - i_a/b)`, which keeps the kernel nonnegative.
//! The Cesàro mean of cubic partial sums (weight `1 - max_a i_a / b`) is
//! available as [`FejerMeans::CubicPartialSums`]; it agrees with the product
//! form in one dimension but its kernel takes negative values in two or more.

use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::series::CosineSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FejerMeans {
    /// Product of univariate Fejér means; range preserving in every dimension.
    #[default]
    Product,
    /// Cesàro average of partial sums over the cubes `||(i,s)||_inf <= t`.
    CubicPartialSums,
}

impl FejerMeans {
    pub fn weight(self, idx: &[usize], order: usize) -> f64 {
        let b = order as f64;
        match self {
            FejerMeans::Product => idx.iter().map(|&i| 1.0 - i as f64 / b).product(),
            FejerMeans::CubicPartialSums => 1.0 - idx.iter().copied().max().unwrap_or(0) as f64 / b,
        }
    }
}

/// Fejér coefficients `eta_idx` of order `order` (frequencies below `order`
/// on every axis).
pub fn fejer_series(f: &GridFunction, order: usize, means: FejerMeans) -> Result<CosineSeries> {
    if order == 0 {
        return Err(Error::InvalidParameter(
            "Fejér order must be at least 1".into(),
        ));
    }
    if order > f.nodes() / 2 {
        return Err(Error::Resolution {
            frequency: order - 1,
            nodes: f.nodes(),
        });
    }
    let raw = CosineSeries::from_grid(f, &vec![order; f.dim()])?;
    Ok(raw.reweighted(|idx| means.weight(idx, order)))
}

/// Order-`order` Fejér approximation of `f`, sampled on the grid of `f`.
pub fn fejer_approximation(f: &GridFunction, order: usize) -> Result<GridFunction> {
    fejer_approximation_with(f, order, FejerMeans::Product)
}

pub fn fejer_approximation_with(
    f: &GridFunction,
    order: usize,
    means: FejerMeans,
) -> Result<GridFunction> {
    fejer_series(f, order, means)?.to_grid(f.nodes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::basis::phi;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants_are_fixed_points() {
        let f = GridFunction::constant(2, 64, 4.0).unwrap();
        let out = fejer_approximation(&f, 5).unwrap();
        for v in out.values() {
            assert_abs_diff_eq!(*v, 4.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn order_two_halves_first_harmonic() {
        // b = 2: the t = 0 partial sum keeps only the (zero) mean, the t = 1
        // sum keeps phi_1, so the average is phi_1 / 2.
        let f = GridFunction::from_fn(1, 512, |p| phi(1, p[0])).unwrap();
        let out = fejer_approximation(&f, 2).unwrap();
        for (v, w) in out.values().iter().zip(f.values()) {
            assert_abs_diff_eq!(*v, 0.5 * w, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_and_cubic_agree_in_one_dimension() {
        let f = GridFunction::from_fn(1, 256, |p| (3.0 * p[0]).sin() + p[0]).unwrap();
        let a = fejer_approximation_with(&f, 7, FejerMeans::Product).unwrap();
        let b = fejer_approximation_with(&f, 7, FejerMeans::CubicPartialSums).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-13);
        }
    }

    #[test]
    fn cubic_kernel_can_leave_the_range_in_2d() {
        // A spike in two dimensions: the cubic-partial-sum mean undershoots
        // zero, the product mean does not.
        let n = 32;
        let mut vals = vec![0.0; n * n];
        vals[5 * n + 20] = 1.0;
        let f = GridFunction::from_values(2, n, vals).unwrap();
        let prod = fejer_approximation_with(&f, 4, FejerMeans::Product).unwrap();
        let cubic = fejer_approximation_with(&f, 4, FejerMeans::CubicPartialSums).unwrap();
        assert!(prod.min() >= -1e-12);
        assert!(cubic.min() < -1e-6);
    }

    #[test]
    fn order_guards() {
        let f = GridFunction::constant(1, 16, 1.0).unwrap();
        assert!(fejer_approximation(&f, 0).is_err());
        assert!(matches!(
            fejer_approximation(&f, 9),
            Err(Error::Resolution { .. })
        ));
    }
}
