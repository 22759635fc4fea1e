//! Estimators that read nuisance functions from the generating model:
//! setting 1 (`g`, `sigma`, `p` known), setting 2 (`sigma`, `p` known),
//! setting 3 (`p` and the range of `sigma^2` known) and the no-split dealer.

use std::ops::Range;
use std::sync::Once;

use super::assembly::{assemble_estimate, d_hat_projection, SeriesEstimate};
use super::rows::{Axes, Projection, RowBases};
use super::scale::{difficulty_estimate, information_grid, inverse_fejer, ScaleFitter};
use super::ustat::block_ustat;
use super::{EnergyDensity, EstimatorOptions, EstimatorTag, Guard, Nuisance};
use crate::block_scheme::BlockScheme;
use crate::error::{Error, Result};
use crate::function_space::{fejer_series, fourier_coefficients, GridFunction};
use crate::sim_models::{coefficient_of_difficulty, Difficulty, RegressionModel, SampledDataset};

/// Fourier coefficients `theta_0..theta_{count-1}` of the model's `f`.
pub fn true_coefficients(model: &RegressionModel, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    Ok(fourier_coefficients(model.regression(), &[count - 1])?
        .coefficients()
        .to_vec())
}

pub(crate) fn difficulty_of(model: &RegressionModel, nuisance: Nuisance<'_>) -> Result<Difficulty> {
    match nuisance.difficulty {
        Some(d) => Ok(d),
        None => coefficient_of_difficulty(model),
    }
}

/// Largest per-axis frequency of the additive-component estimate,
/// `floor(n^{1/D} / b_n^{2/D})`, at least 1.
pub fn additive_cutoff(n: usize, b_n: usize, aux_dim: usize) -> usize {
    let dim = aux_dim as f64;
    let v = (n as f64).powf(1.0 / dim) / (b_n as f64).powf(2.0 / dim);
    (v.floor() as usize).max(1)
}

/// `|rows|^{-1} sum_l (r_l - pilot_{-j}(X_l)) w_l phi_j(X_l)` for every
/// frequency of the scheme.
pub(crate) fn coefficient_estimates(
    bases: &RowBases,
    scheme: &BlockScheme,
    rows: Range<usize>,
    residual: &[f64],
    weight: &[f64],
    pilot: &Projection,
) -> Result<Vec<f64>> {
    if rows.is_empty() {
        return Err(Error::InsufficientData(
            "no rows left for coefficient estimates".into(),
        ));
    }
    if scheme.is_split() && rows.len() < scheme.m {
        static SMALL_REST: Once = Once::new();
        SMALL_REST.call_once(|| {
            log::warn!(
                "only {} of {} rows remain for coefficient estimates after splitting",
                rows.len(),
                scheme.n
            )
        });
    }
    let count = rows.len() as f64;
    Ok((0..scheme.coefficient_count())
        .map(|j| {
            rows.clone()
                .map(|l| {
                    (residual[l] - pilot.at_row_without(bases, l, j)) * weight[l] * bases.x(l)[j]
                })
                .sum::<f64>()
                / count
        })
        .collect())
}

/// Block energies from the symmetric U-statistic with row values
/// `weighted[l] phi_j(X_l)` over `rows`.
pub(crate) fn energy_estimates(
    bases: &RowBases,
    scheme: &BlockScheme,
    rows: Range<usize>,
    weighted: &[f64],
) -> Result<Vec<f64>> {
    (0..scheme.block_count())
        .map(|k| {
            let terms: Vec<Vec<f64>> = scheme
                .block(k)
                .map(|j| rows.clone().map(|l| weighted[l] * bases.x(l)[j]).collect())
                .collect();
            block_ustat(&terms, &terms)
        })
        .collect()
}

pub(crate) fn finish(
    tag: &str,
    raw: Vec<f64>,
    energy: Vec<f64>,
    d: f64,
    scheme: &BlockScheme,
    opts: &EstimatorOptions,
    guard: &Guard,
) -> Result<SeriesEstimate> {
    let d = if opts.project_difficulty {
        d_hat_projection(d, scheme, opts.c2)
    } else {
        d
    };
    let mut est = assemble_estimate(tag, raw, energy, d, scheme)?;
    est.guard_events = guard.events();
    Ok(est)
}

/// Settings 1 to 3 and the no-split dealer estimator.
pub fn fit_known(
    tag: EstimatorTag,
    data: &SampledDataset,
    scheme: &BlockScheme,
    nuisance: Nuisance<'_>,
    opts: &EstimatorOptions,
) -> Result<SeriesEstimate> {
    let model = nuisance.model(tag)?;
    if model.aux_dim() != data.aux_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.aux_dim(),
            got: data.aux_dim(),
        });
    }
    let n = data.len();
    if scheme.n != n {
        return Err(Error::InvalidParameter(format!(
            "scheme built for n = {} applied to {n} rows",
            scheme.n
        )));
    }
    let guard = Guard::new(opts.guard_floor);
    let b = scheme.b_n;
    let aux = data.aux_dim();
    let n_g = additive_cutoff(n, b, aux);
    let exclude = opts.exclude_self && !scheme.is_split();
    let bases = RowBases::new(
        data,
        scheme.coefficient_count().max(b + 1),
        (n_g + 1).max(b),
    );
    let x = data.x();
    let y = data.y();

    let joint: Vec<f64> = (0..n)
        .map(|l| guard.apply(model.density_at(x[l], data.z(l)), "design density"))
        .collect::<Result<_>>()?;
    let pilot_extent = vec![b + 1];

    match tag {
        EstimatorTag::S1 | EstimatorTag::D => {
            let marginal: Vec<f64> = (0..n)
                .map(|l| guard.apply(model.marginal_at(x[l]), "marginal density"))
                .collect::<Result<_>>()?;
            let g: Vec<f64> = (0..n).map(|l| model.additive_at(data.z(l))).collect();
            let residual: Vec<f64> = (0..n).map(|l| y[l] - g[l]).collect();
            let info = model
                .density()
                .zip_with(model.scale(), |p, s| p / (s * s))?
                .integrate_trailing()?;
            let weight: Vec<f64> = (0..n)
                .map(|l| {
                    let s = model.scale_at(x[l], data.z(l));
                    let i = guard.apply(info.eval_split(x[l], &[]), "conditional information")?;
                    Ok(1.0 / (s * s * i))
                })
                .collect::<Result<_>>()?;
            let pilot = Projection::fit(
                &bases,
                Axes::X,
                pilot_extent,
                scheme.group(1),
                |l| residual[l] / marginal[l],
                false,
                exclude,
            );
            let raw =
                coefficient_estimates(&bases, scheme, scheme.rest(2), &residual, &weight, &pilot)?;
            let weighted: Vec<f64> = match opts.energy_density {
                EnergyDensity::Joint => (0..n).map(|l| y[l] / joint[l]).collect(),
                EnergyDensity::Marginal => (0..n).map(|l| residual[l] / marginal[l]).collect(),
            };
            let energy = energy_estimates(&bases, scheme, scheme.group(2), &weighted)?;
            let d = difficulty_of(model, nuisance)?.d;
            finish(tag.name(), raw, energy, d, scheme, opts, &guard)
        }
        EstimatorTag::S2 | EstimatorTag::S3 => {
            let (inverse, d, rest) = if tag == EstimatorTag::S2 {
                let inverse = fejer_series(&model.inverse_variance()?, b, opts.fejer)?;
                (inverse, difficulty_of(model, nuisance)?.d, scheme.rest(3))
            } else {
                let fitter = ScaleFitter {
                    bases: &bases,
                    y,
                    order: b,
                    bounds: opts.bounds()?,
                    nodes: model.density().nodes(),
                    exclude_self: exclude,
                };
                let pilot_var = fitter.fit(scheme.group(4), &joint, scheme.group(5), &joint)?;
                let d = difficulty_estimate(&pilot_var, model.density(), &guard)?;
                let var = fitter.fit(scheme.group(6), &joint, scheme.group(7), &joint)?;
                (inverse_fejer(&var, b, opts.fejer)?, d, scheme.rest(7))
            };
            let info: GridFunction = information_grid(model.density(), &inverse)?;
            let weight: Vec<f64> = (0..n)
                .map(|l| {
                    let i = guard.apply(info.eval_split(x[l], &[]), "conditional information")?;
                    Ok(inverse.eval_split(x[l], data.z(l)) / i)
                })
                .collect::<Result<_>>()?;
            let pilot = Projection::fit(
                &bases,
                Axes::X,
                pilot_extent,
                scheme.group(1),
                |l| y[l] / joint[l],
                false,
                exclude,
            );
            let additive = Projection::fit(
                &bases,
                Axes::Aux,
                vec![n_g + 1; aux],
                scheme.group(3),
                |l| y[l] / joint[l],
                true,
                exclude,
            );
            let residual: Vec<f64> = (0..n).map(|l| y[l] - additive.at_row(&bases, l)).collect();
            let raw = coefficient_estimates(&bases, scheme, rest, &residual, &weight, &pilot)?;
            let weighted: Vec<f64> = (0..n).map(|l| y[l] / joint[l]).collect();
            let energy = energy_estimates(&bases, scheme, scheme.group(2), &weighted)?;
            finish(tag.name(), raw, energy, d, scheme, opts, &guard)
        }
        other => Err(Error::InvalidParameter(format!(
            "estimator {other} does not use known nuisance functions"
        ))),
    }
}
