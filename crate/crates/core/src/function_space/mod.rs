//! Cosine bases on `[0,1]^k`, midpoint-grid quadrature, Fejér means and the
//! Sobolev-type function classes used by the estimators.

pub mod basis;
pub mod classes;
pub mod fejer;
pub mod grid;
pub mod series;

pub use basis::{
    basis_vector, cos_basis_eval, fill_basis, phi, tensor_basis_eval, CosineBasisIndex, TensorIndex,
};
pub use classes::{
    assumption_diagnostics, family_membership, pinsker_constant, sobolev_weight,
    AssumptionDiagnostics, FunctionFamilySpec, MembershipReport, SmoothnessClassSpec,
};
pub use fejer::{fejer_approximation, fejer_approximation_with, fejer_series, FejerMeans};
pub use grid::{
    corrected_midpoint_weights, node, nodes_of, GridFunction, DEFAULT_NODES_1D, DEFAULT_NODES_ND,
};
pub use series::CosineSeries;

use crate::error::Result;

/// Quadrature Fourier coefficients of `f` on the box of indices whose
/// per-axis frequency is at most `max_index[a]`.
pub fn fourier_coefficients(f: &GridFunction, max_index: &[usize]) -> Result<CosineSeries> {
    let extents: Vec<usize> = max_index.iter().map(|&m| m + 1).collect();
    CosineSeries::from_grid(f, &extents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn sampled_basis_element_has_unit_coefficient() {
        let f = GridFunction::from_fn(1, 512, |p| phi(3, p[0])).unwrap();
        let c = fourier_coefficients(&f, &[10]).unwrap();
        for (j, &v) in c.coefficients().iter().enumerate() {
            let want = if j == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_function() {
        let f = GridFunction::constant(1, 512, 2.5).unwrap();
        let c = fourier_coefficients(&f, &[6]).unwrap();
        assert_abs_diff_eq!(c.coefficients()[0], 2.5, epsilon = 1e-12);
        for &v in &c.coefficients()[1..] {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_function_coefficients() {
        // closed form: theta_1 = int_0^1 x sqrt(2) cos(pi x) dx = -2 sqrt(2) / pi^2
        let closed = -2.0 * SQRT_2 / (PI * PI);
        // independent oracle: composite Simpson on 20001 points
        let m = 20_000;
        let h = 1.0 / m as f64;
        let simpson: f64 = (0..=m)
            .map(|i| {
                let x = i as f64 * h;
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * x * SQRT_2 * (PI * x).cos()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert_abs_diff_eq!(simpson, closed, epsilon = 1e-12);

        let f = GridFunction::from_fn(1, 512, |p| p[0]).unwrap();
        let c = fourier_coefficients(&f, &[3]).unwrap();
        assert_abs_diff_eq!(c.coefficients()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.coefficients()[1], -0.28658, epsilon = 1e-5);
        assert_abs_diff_eq!(c.coefficients()[1], closed, epsilon = 1e-5);
    }

    #[test]
    fn truncation_beyond_resolution() {
        let f = GridFunction::constant(1, 64, 1.0).unwrap();
        assert!(fourier_coefficients(&f, &[32]).is_err());
    }
}
