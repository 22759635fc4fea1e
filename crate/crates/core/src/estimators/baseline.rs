//! Baseline series estimator on `(X, Y)` alone. It ignores the auxiliary
//! covariates and the heteroscedasticity: coefficients are plain
//! `Y phi_j(X) / p(X)` averages and the difficulty is estimated by
//! `E{(Y - f(X))^2 / p^2(X)}`.

use super::assembly::SeriesEstimate;
use super::known::{coefficient_estimates, energy_estimates, finish};
use super::rows::{Axes, Projection, RowBases};
use super::{EstimatorOptions, Guard, MarginalSource, Nuisance};
use crate::block_scheme::BlockScheme;
use crate::error::{Error, Result};
use crate::sim_models::SampledDataset;

pub fn fit_baseline(
    data: &SampledDataset,
    scheme: &BlockScheme,
    nuisance: Nuisance<'_>,
    opts: &EstimatorOptions,
) -> Result<SeriesEstimate> {
    let n = data.len();
    if scheme.n != n {
        return Err(Error::InvalidParameter(format!(
            "scheme built for n = {} applied to {n} rows",
            scheme.n
        )));
    }
    if n < 2 {
        return Err(Error::InsufficientData(
            "baseline needs at least 2 rows".into(),
        ));
    }
    let guard = Guard::new(opts.guard_floor);
    let b = scheme.b_n;
    let bases = RowBases::new(data, scheme.coefficient_count().max(b + 1), 1);
    let x = data.x();
    let y = data.y();
    let all = 0..n;

    let density: Vec<f64> = match opts.marginal {
        MarginalSource::Known => {
            let model = nuisance
                .model
                .ok_or_else(|| Error::Config("known marginal density needs the model".into()))?;
            all.clone()
                .map(|l| guard.apply(model.marginal_at(x[l]), "marginal density"))
                .collect::<Result<_>>()?
        }
        MarginalSource::Projection => {
            let mut proj = Projection::fit(
                &bases,
                Axes::X,
                vec![b + 1],
                all.clone(),
                |_| 1.0,
                false,
                opts.exclude_self,
            );
            if opts.density_threshold {
                proj.hard_threshold(&bases);
            }
            let floor = 1.0 / scheme.c_n as f64;
            all.clone()
                .map(|l| proj.at_row(&bases, l).max(floor))
                .collect()
        }
    };

    let pilot = Projection::fit(
        &bases,
        Axes::X,
        vec![b + 1],
        all.clone(),
        |l| y[l] / density[l],
        false,
        opts.exclude_self,
    );
    let weight: Vec<f64> = density.iter().map(|p| 1.0 / p).collect();
    let raw = if opts.baseline_pilot {
        coefficient_estimates(&bases, scheme, all.clone(), y, &weight, &pilot)?
    } else {
        let zero = Projection::fit(&bases, Axes::X, vec![1], all.clone(), |_| 0.0, false, false);
        coefficient_estimates(&bases, scheme, all.clone(), y, &weight, &zero)?
    };
    let weighted: Vec<f64> = y.iter().zip(&density).map(|(y, p)| y / p).collect();
    let energy = energy_estimates(&bases, scheme, all.clone(), &weighted)?;
    let d = all
        .map(|l| {
            let r = (y[l] - pilot.at_row(&bases, l)) / density[l];
            r * r
        })
        .sum::<f64>()
        / n as f64;
    finish("E", raw, energy, d, scheme, opts, &guard)
}
