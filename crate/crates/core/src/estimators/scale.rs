//! Bona fide projection estimates of the scale and the weights built from
//! them.

use std::ops::Range;

use super::rows::{Axes, Projection, RowBases};
use super::Guard;
use crate::error::Result;
use crate::function_space::{fejer_series, CosineSeries, FejerMeans, GridFunction};

/// Projection estimates of the regression surface and of `sigma^2` over the
/// frequency box `||(i, r)||_inf < order`.
pub(crate) struct ScaleFitter<'a> {
    pub bases: &'a RowBases,
    pub y: &'a [f64],
    pub order: usize,
    pub bounds: (f64, f64),
    pub nodes: usize,
    pub exclude_self: bool,
}

impl ScaleFitter<'_> {
    fn extents(&self) -> Vec<usize> {
        vec![self.order; 1 + self.bases.aux_dim()]
    }

    /// Surface estimate from `group` with weights `Y / p`, clamped to
    /// `[-order, order]` and evaluated at `rows`.
    pub fn mean_at_rows(
        &self,
        group: Range<usize>,
        density: &[f64],
        rows: Range<usize>,
    ) -> Vec<f64> {
        let y = self.y;
        let proj = Projection::fit(
            self.bases,
            Axes::Joint,
            self.extents(),
            group,
            |l| y[l] / density[l],
            false,
            self.exclude_self,
        );
        let b = self.order as f64;
        rows.map(|l| proj.at_row(self.bases, l).clamp(-b, b))
            .collect()
    }

    /// Squared-residual projection from `group`, clamped to the variance
    /// bounds on the working grid. `mean[l - group.start]` is the surface
    /// estimate at row `l`.
    pub fn variance(
        &self,
        group: Range<usize>,
        density: &[f64],
        mean: &[f64],
    ) -> Result<GridFunction> {
        let y = self.y;
        let start = group.start;
        let proj = Projection::fit(
            self.bases,
            Axes::Joint,
            self.extents(),
            group,
            |l| {
                let r = y[l] - mean[l - start];
                r * r / density[l]
            },
            false,
            false,
        );
        let (lo, hi) = self.bounds;
        proj.series().to_grid(self.nodes)?.map(|v| v.clamp(lo, hi))
    }

    /// Surface estimate on `mean_group`, then the clamped variance estimate
    /// on `var_group`.
    pub fn fit(
        &self,
        mean_group: Range<usize>,
        mean_density: &[f64],
        var_group: Range<usize>,
        var_density: &[f64],
    ) -> Result<GridFunction> {
        let mean = self.mean_at_rows(mean_group, mean_density, var_group.clone());
        self.variance(var_group, var_density, &mean)
    }
}

/// `int dx / int p(x, z) / v(x, z) dz` on a shared grid.
pub(crate) fn difficulty_estimate(
    variance: &GridFunction,
    density: &GridFunction,
    guard: &Guard,
) -> Result<f64> {
    let weighted = density.zip_with(variance, |p, v| p / v)?;
    let inner = weighted.integrate_trailing()?;
    let mut acc = 0.0;
    for &v in inner.values() {
        acc += 1.0 / guard.apply(v, "inner integral of the difficulty estimate")?;
    }
    Ok(acc / inner.len() as f64)
}

/// Fejér coefficients of order `order` of `1 / variance`.
pub fn inverse_fejer(
    variance: &GridFunction,
    order: usize,
    means: FejerMeans,
) -> Result<CosineSeries> {
    fejer_series(&variance.map(|v| 1.0 / v)?, order, means)
}

/// `x -> int p(x, z) w(x, z) dz` for a series `w`, on the grid of `density`.
pub fn information_grid(density: &GridFunction, weight: &CosineSeries) -> Result<GridFunction> {
    let w = weight.to_grid(density.nodes())?;
    density.zip_with(&w, |p, w| p * w)?.integrate_trailing()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_models::SampledDataset;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_variance_fixed_by_fejer() {
        let v = GridFunction::constant(2, 32, 4.0).unwrap();
        let inv = inverse_fejer(&v, 5, FejerMeans::Product).unwrap();
        assert_abs_diff_eq!(inv.get(&[0, 0]), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(inv.energy(), 0.0625, epsilon = 1e-14);
        let p = GridFunction::constant(2, 32, 1.0).unwrap();
        let info = information_grid(&p, &inv).unwrap();
        assert!(info.values().iter().all(|&v| (v - 0.25).abs() < 1e-13));
        let g = Guard::new(1e-6);
        assert_abs_diff_eq!(
            difficulty_estimate(&v, &p, &g).unwrap(),
            4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn clamp_below_lower_bound() {
        let data = SampledDataset::new(
            1,
            vec![0.1, 0.4, 0.6, 0.9],
            vec![0.3, 0.7, 0.2, 0.8],
            vec![0.01, 0.02, 0.0, 0.01],
        )
        .unwrap();
        let bases = RowBases::new(&data, 4, 4);
        let fitter = ScaleFitter {
            bases: &bases,
            y: data.y(),
            order: 2,
            bounds: (1.0, 9.0),
            nodes: 16,
            exclude_self: false,
        };
        let ones = vec![1.0; 4];
        let v = fitter.fit(0..4, &ones, 0..4, &ones).unwrap();
        assert!(v.values().iter().all(|&x| x == 1.0));
    }
}
