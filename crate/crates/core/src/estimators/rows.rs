//! Per-row basis tables and empirical projection estimates.

use std::ops::Range;

use crate::function_space::{fill_basis, CosineSeries};
use crate::sim_models::SampledDataset;

/// Cosine basis values at every observation: `kx` frequencies in `x` and
/// `kz` frequencies on each auxiliary axis.
pub(crate) struct RowBases {
    kx: usize,
    kz: usize,
    aux_dim: usize,
    x: Vec<f64>,
    z: Vec<f64>,
}

impl RowBases {
    pub fn new(data: &SampledDataset, kx: usize, kz: usize) -> Self {
        let n = data.len();
        let aux_dim = data.aux_dim();
        let kx = kx.max(1);
        let kz = kz.max(1);
        let mut x = vec![0.0; n * kx];
        for (l, chunk) in x.chunks_exact_mut(kx).enumerate() {
            fill_basis(data.x()[l], chunk);
        }
        let mut z = vec![0.0; n * aux_dim * kz];
        for (t, chunk) in z.chunks_exact_mut(kz).enumerate() {
            fill_basis(data.z_flat()[t], chunk);
        }
        Self {
            kx,
            kz,
            aux_dim,
            x,
            z,
        }
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn x(&self, l: usize) -> &[f64] {
        &self.x[l * self.kx..(l + 1) * self.kx]
    }

    pub fn z(&self, l: usize, axis: usize) -> &[f64] {
        let start = (l * self.aux_dim + axis) * self.kz;
        &self.z[start..start + self.kz]
    }

    /// Basis slices for a series over the axes `axes` with the given extents.
    pub fn slices(&self, l: usize, axes: Axes, extents: &[usize]) -> Vec<&[f64]> {
        match axes {
            Axes::X => vec![&self.x(l)[..extents[0]]],
            Axes::Aux => (0..self.aux_dim)
                .map(|a| &self.z(l, a)[..extents[a]])
                .collect(),
            Axes::Joint => {
                let mut out = Vec::with_capacity(1 + self.aux_dim);
                out.push(&self.x(l)[..extents[0]]);
                out.extend((0..self.aux_dim).map(|a| &self.z(l, a)[..extents[a + 1]]));
                out
            }
        }
    }
}

/// Which covariates a projection is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axes {
    X,
    Aux,
    Joint,
}

/// `m^{-1} sum_{l in group} w_l prod_a basis_a(row l)` over a box of
/// frequencies, optionally without the all-zero index. Values at rows of the
/// group can leave out that row's own term.
pub(crate) struct Projection {
    series: CosineSeries,
    axes: Axes,
    group: Range<usize>,
    weights: Vec<f64>,
    skip_origin: bool,
    exclude_self: bool,
}

impl Projection {
    pub fn fit(
        bases: &RowBases,
        axes: Axes,
        extents: Vec<usize>,
        group: Range<usize>,
        weight: impl Fn(usize) -> f64,
        skip_origin: bool,
        exclude_self: bool,
    ) -> Self {
        let mut series = CosineSeries::zeros(extents.clone());
        let weights: Vec<f64> = group.clone().map(&weight).collect();
        for (l, &w) in group.clone().zip(&weights) {
            series.accumulate_outer(&bases.slices(l, axes, &extents), w);
        }
        series.scale(1.0 / group.len() as f64);
        if skip_origin {
            series.coefficients_mut()[0] = 0.0;
        }
        Self {
            series,
            axes,
            group,
            weights,
            skip_origin,
            exclude_self,
        }
    }

    pub fn series(&self) -> &CosineSeries {
        &self.series
    }

    /// Keeps the all-zero index and every coefficient whose square exceeds
    /// `2 ln(m) / m` times the empirical variance of its row terms; the rest
    /// are set to zero. Values at rows then include the row's own term.
    pub fn hard_threshold(&mut self, bases: &RowBases) {
        let extents = self.series.extents().to_vec();
        let mut second = CosineSeries::zeros(extents.clone());
        for (l, &w) in self.group.clone().zip(&self.weights) {
            let squared: Vec<Vec<f64>> = bases
                .slices(l, self.axes, &extents)
                .iter()
                .map(|s| s.iter().map(|v| v * v).collect())
                .collect();
            let refs: Vec<&[f64]> = squared.iter().map(|v| v.as_slice()).collect();
            second.accumulate_outer(&refs, w * w);
        }
        let m = self.group.len() as f64;
        let level = 2.0 * m.ln() / m;
        for (i, (c, s)) in self
            .series
            .coefficients_mut()
            .iter_mut()
            .zip(second.coefficients())
            .enumerate()
        {
            let var = (s / m - *c * *c).max(0.0);
            if i > 0 && *c * *c <= level * var {
                *c = 0.0;
            }
        }
        self.exclude_self = false;
    }

    fn own_weight(&self, l: usize) -> Option<f64> {
        if self.exclude_self && self.group.contains(&l) && self.group.len() > 1 {
            Some(self.weights[l - self.group.start])
        } else {
            None
        }
    }

    fn leave_out(&self, full: f64, own: f64) -> f64 {
        let m = self.group.len() as f64;
        (m * full - own) / (m - 1.0)
    }

    /// Value at row `l`.
    pub fn at_row(&self, bases: &RowBases, l: usize) -> f64 {
        let slices = bases.slices(l, self.axes, self.series.extents());
        let full = self.series.eval_with_bases(&slices);
        match self.own_weight(l) {
            Some(w) => {
                let mut kernel: f64 = slices
                    .iter()
                    .map(|s| s.iter().map(|v| v * v).sum::<f64>())
                    .product();
                if self.skip_origin {
                    kernel -= 1.0;
                }
                self.leave_out(full, w * kernel)
            }
            None => full,
        }
    }

    /// Value at row `l` of a projection on `x` with frequency `skip` removed.
    pub fn at_row_without(&self, bases: &RowBases, l: usize, skip: usize) -> f64 {
        debug_assert_eq!(self.axes, Axes::X);
        let e = self.series.extents()[0];
        let bx = &bases.x(l)[..e];
        let c = self.series.coefficients();
        let mut full: f64 = c.iter().zip(bx).map(|(c, b)| c * b).sum();
        if skip < e {
            full -= c[skip] * bx[skip];
        }
        match self.own_weight(l) {
            Some(w) => {
                let mut kernel: f64 = bx.iter().map(|v| v * v).sum();
                if skip < e {
                    kernel -= bx[skip] * bx[skip];
                }
                if self.skip_origin {
                    kernel -= 1.0;
                }
                self.leave_out(full, w * kernel)
            }
            None => full,
        }
    }

    /// Joint projection with `x` fixed at row `l`'s covariate, as a series
    /// in the auxiliary covariates.
    pub fn restrict_at_row(&self, bases: &RowBases, l: usize) -> CosineSeries {
        debug_assert_eq!(self.axes, Axes::Joint);
        let extents = self.series.extents();
        let ex = extents[0];
        let inner: usize = extents[1..].iter().product();
        let bx = &bases.x(l)[..ex];
        let c = self.series.coefficients();
        let mut out = vec![0.0; inner];
        for (i, &b) in bx.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(&c[i * inner..(i + 1) * inner]) {
                *o += b * v;
            }
        }
        let mut series = CosineSeries::from_coefficients(extents[1..].to_vec(), out)
            .expect("consistent extents");
        if let Some(w) = self.own_weight(l) {
            let sx: f64 = bx.iter().map(|v| v * v).sum();
            let mut own = CosineSeries::zeros(extents[1..].to_vec());
            let slices: Vec<&[f64]> = (0..bases.aux_dim())
                .map(|a| &bases.z(l, a)[..extents[a + 1]])
                .collect();
            own.accumulate_outer(&slices, w * sx);
            if self.skip_origin {
                // the removed origin term contributes only through z = 0
                own.coefficients_mut()[0] -= w;
            }
            let m = self.group.len() as f64;
            for (s, o) in series.coefficients_mut().iter_mut().zip(own.coefficients()) {
                *s = (m * *s - o) / (m - 1.0);
            }
        }
        series
    }
}
