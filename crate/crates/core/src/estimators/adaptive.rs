//! Fully data-driven estimators: unknown `g`, `sigma` and design density,
//! with analytic or Sobolev cutoffs for the density estimates.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::assembly::SeriesEstimate;
use super::known::{coefficient_estimates, finish};
use super::rows::{Axes, Projection, RowBases};
use super::scale::{difficulty_estimate, inverse_fejer, ScaleFitter};
use super::ustat::block_ustat;
use super::{DensityFlag, EstimatorOptions, Guard};
use crate::block_scheme::BlockScheme;
use crate::error::{Error, Result};
use crate::function_space::{CosineSeries, GridFunction};
use crate::sim_models::SampledDataset;

/// Number of split groups used by the data-driven estimators.
pub const ADAPTIVE_GROUPS: usize = 21;

/// Largest per-axis frequencies used by the data-driven estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityCutoffs {
    /// Density estimates feeding the nuisance fits.
    pub standard: usize,
    /// Density estimates feeding the weights and block energies.
    pub refined: usize,
    /// Largest frequency of the leave-one-frequency-out pilot of `f`.
    pub pilot: usize,
    /// Largest per-axis frequency of the additive-component estimate.
    pub additive: usize,
}

fn floor_root(n: usize, power: f64) -> usize {
    ((n as f64).powf(power) + 1e-9).floor() as usize
}

pub fn density_cutoffs(
    n: usize,
    b_n: usize,
    c_n: usize,
    aux_dim: usize,
    flag: DensityFlag,
) -> DensityCutoffs {
    let dim = aux_dim as f64;
    match flag {
        DensityFlag::Analytic => {
            let standard = b_n * c_n;
            let additive =
                ((n as f64).powf(1.0 / dim) / (b_n as f64).powf(2.0 * dim) + 1e-9).floor() as usize;
            DensityCutoffs {
                standard,
                refined: standard,
                pilot: b_n,
                additive: additive.max(1),
            }
        }
        DensityFlag::Sobolev => DensityCutoffs {
            standard: floor_root(n, 1.0 / (3.0 * (dim + 1.0))).max(1),
            refined: floor_root(n, 1.0 / (2.0 * (dim + 2.0))).max(1),
            pilot: floor_root(n, 1.0 / 3.0),
            additive: floor_root(n, 1.0 / (3.0 * dim)).max(1),
        },
    }
}

/// Projection density estimate clamped below.
struct DensityFit {
    group: Range<usize>,
    cutoff: usize,
    proj: Projection,
    floor: f64,
    rows: Vec<f64>,
}

impl DensityFit {
    fn grid(&self, nodes: usize) -> Result<GridFunction> {
        let floor = self.floor;
        self.proj.series().to_grid(nodes)?.map(|v| v.max(floor))
    }

    /// Values on the auxiliary grid at `x = X_l`.
    fn section(&self, bases: &RowBases, l: usize, nodes: usize) -> Result<GridFunction> {
        let floor = self.floor;
        self.proj
            .restrict_at_row(bases, l)
            .to_grid(nodes)?
            .map(|v| v.max(floor))
    }
}

/// Density estimates keyed by group and cutoff, so the aliased groups of
/// the no-split mode share one fit.
struct Densities<'a> {
    bases: &'a RowBases,
    n: usize,
    aux_dim: usize,
    floor: f64,
    exclude_self: bool,
    threshold: bool,
    fits: Vec<DensityFit>,
}

impl<'a> Densities<'a> {
    fn index(&mut self, group: Range<usize>, cutoff: usize) -> usize {
        if let Some(i) = self
            .fits
            .iter()
            .position(|f| f.group == group && f.cutoff == cutoff)
        {
            return i;
        }
        let mut proj = Projection::fit(
            self.bases,
            Axes::Joint,
            vec![cutoff + 1; 1 + self.aux_dim],
            group.clone(),
            |_| 1.0,
            false,
            self.exclude_self,
        );
        if self.threshold {
            proj.hard_threshold(self.bases);
        }
        let rows = (0..self.n)
            .map(|l| proj.at_row(self.bases, l).max(self.floor))
            .collect();
        self.fits.push(DensityFit {
            group,
            cutoff,
            proj,
            floor: self.floor,
            rows,
        });
        self.fits.len() - 1
    }
}

/// `int p(X_l, z) w(X_l, z) dz` with the density section at row `l`.
fn information_at_row(
    density: &DensityFit,
    weight: &CosineSeries,
    bases: &RowBases,
    x: f64,
    l: usize,
    nodes: usize,
) -> Result<f64> {
    let p = density.section(bases, l, nodes)?;
    let w = weight.restrict_first(x)?.to_grid(nodes)?;
    Ok(p.values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / p.len() as f64)
}

/// Settings 4 and 5, and the no-split data-driven estimator.
pub fn fit_adaptive(
    data: &SampledDataset,
    scheme: &BlockScheme,
    flag: DensityFlag,
    opts: &EstimatorOptions,
) -> Result<SeriesEstimate> {
    let n = data.len();
    if scheme.n != n {
        return Err(Error::InvalidParameter(format!(
            "scheme built for n = {} applied to {n} rows",
            scheme.n
        )));
    }
    if scheme.is_split() && scheme.divisor < ADAPTIVE_GROUPS {
        return Err(Error::InvalidParameter(format!(
            "data-driven estimator needs {ADAPTIVE_GROUPS} split groups, scheme has {}",
            scheme.divisor
        )));
    }
    let bounds = opts.bounds()?;
    let guard = Guard::new(opts.guard_floor);
    let b = scheme.b_n;
    let aux = data.aux_dim();
    let cut = density_cutoffs(n, b, scheme.c_n, aux, flag);
    let exclude = opts.exclude_self && !scheme.is_split();
    let nodes = opts.grid_nodes;
    if 2 * b > nodes || 2 * (cut.standard.max(cut.refined) + 1) > nodes {
        return Err(Error::Resolution {
            frequency: b.max(cut.standard + 1),
            nodes,
        });
    }
    let kx = scheme
        .coefficient_count()
        .max(cut.pilot + 1)
        .max(cut.standard.max(cut.refined) + 1)
        .max(b);
    let kz = (cut.additive + 1)
        .max(cut.standard.max(cut.refined) + 1)
        .max(b);
    let bases = RowBases::new(data, kx, kz);
    let x = data.x();
    let y = data.y();

    let mut dens = Densities {
        bases: &bases,
        n,
        aux_dim: aux,
        floor: 1.0 / scheme.c_n as f64,
        exclude_self: exclude,
        threshold: opts.density_threshold,
        fits: Vec::new(),
    };
    let p: Vec<usize> = (1..=9)
        .map(|s| dens.index(scheme.group(s), cut.standard))
        .collect();
    let check: Vec<usize> = (1..=3)
        .map(|s| dens.index(scheme.group(15 + s), cut.refined))
        .collect();
    let fits = dens.fits;
    let row_density = |i: usize| fits[i].rows.as_slice();

    let fitter = ScaleFitter {
        bases: &bases,
        y,
        order: b,
        bounds,
        nodes,
        exclude_self: exclude,
    };
    let pilot_var = fitter.fit(
        scheme.group(10),
        row_density(p[0]),
        scheme.group(11),
        row_density(p[1]),
    )?;
    let d = difficulty_estimate(&pilot_var, &fits[p[2]].grid(nodes)?, &guard)?;

    let pilot = Projection::fit(
        &bases,
        Axes::X,
        vec![cut.pilot + 1],
        scheme.group(12),
        |l| y[l] / row_density(p[3])[l],
        false,
        exclude,
    );
    let additive = Projection::fit(
        &bases,
        Axes::Aux,
        vec![cut.additive + 1; aux],
        scheme.group(13),
        |l| y[l] / row_density(p[4])[l],
        true,
        exclude,
    );
    let var = fitter.fit(
        scheme.group(14),
        row_density(p[5]),
        scheme.group(15),
        row_density(p[6]),
    )?;
    let inverse = inverse_fejer(&var, b, opts.fejer)?;

    let rest = scheme.rest(ADAPTIVE_GROUPS);
    let mut weight = vec![0.0; n];
    let mut residual = vec![0.0; n];
    for l in rest.clone() {
        let info = information_at_row(&fits[check[0]], &inverse, &bases, x[l], l, nodes)?;
        let info = guard.apply(info, "estimated conditional information")?;
        weight[l] = inverse.eval_split(x[l], data.z(l)) / info;
        residual[l] = y[l] - additive.at_row(&bases, l);
    }
    let raw = coefficient_estimates(&bases, scheme, rest, &residual, &weight, &pilot)?;

    // centring by leave-one-frequency-out surface fits, Sobolev case only
    let centring: Option<Vec<(Projection, Projection)>> = match flag {
        DensityFlag::Analytic => None,
        DensityFlag::Sobolev => Some(
            (1..=2)
                .map(|s| {
                    let dens = row_density(p[6 + s]);
                    let group = scheme.group(18 + s);
                    let fx = Projection::fit(
                        &bases,
                        Axes::X,
                        vec![cut.pilot + 1],
                        group.clone(),
                        |l| y[l] / dens[l],
                        false,
                        exclude,
                    );
                    let gz = Projection::fit(
                        &bases,
                        Axes::Aux,
                        vec![cut.additive + 1; aux],
                        group,
                        |l| y[l] / dens[l],
                        true,
                        exclude,
                    );
                    (fx, gz)
                })
                .collect(),
        ),
    };
    let pair_rows = scheme.group(ADAPTIVE_GROUPS);
    let first_density = row_density(check[1]);
    let second_density = row_density(check[2]);
    let terms = |j: usize, side: usize, dens: &[f64]| -> Vec<f64> {
        pair_rows
            .clone()
            .map(|l| {
                let centre = centring.as_ref().map_or(0.0, |c| {
                    let (fx, gz) = &c[side];
                    fx.at_row_without(&bases, l, j) + gz.at_row(&bases, l)
                });
                (y[l] - centre) * bases.x(l)[j] / dens[l]
            })
            .collect()
    };
    let energy = (0..scheme.block_count())
        .map(|k| {
            let first: Vec<Vec<f64>> = scheme
                .block(k)
                .map(|j| terms(j, 0, first_density))
                .collect();
            let second: Vec<Vec<f64>> = scheme
                .block(k)
                .map(|j| terms(j, 1, second_density))
                .collect();
            block_ustat(&first, &second)
        })
        .collect::<Result<Vec<f64>>>()?;
    let tag = match flag {
        DensityFlag::Analytic => "s4",
        DensityFlag::Sobolev => "s5",
    };
    finish(tag, raw, energy, d, scheme, opts, &guard)
}
