//! Series estimators of the regression function `f` in
//! `Y = f(X) + g(Z) + sigma(X, Z) eps`: oracle shrinkage, the five nuisance
//! settings, the no-split dealer and data-driven estimators, and the
//! heteroscedasticity-ignoring baseline.

pub mod adaptive;
pub mod assembly;
pub mod baseline;
pub mod known;
pub(crate) mod rows;
pub mod scale;
pub mod ustat;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adaptive::{density_cutoffs, fit_adaptive, DensityCutoffs};
pub use assembly::{
    apply_oracle, assemble_estimate, block_energies, bona_fide_clamp, d_hat_projection,
    oracle_estimate, oracle_weights, shrinkage_weight, SeriesEstimate, BONA_FIDE_DELTA,
    CURVE_POINTS,
};
pub use baseline::fit_baseline;
pub use known::{fit_known, true_coefficients};
pub use ustat::{big_theta_hat, big_theta_hat_pairs, block_ustat, ordered_pair_sum};

use crate::block_scheme::{build_scheme, BlockScheme};
use crate::error::{Error, Result};
use crate::function_space::FejerMeans;
use crate::sim_models::{Difficulty, RegressionModel, SampledDataset};

/// Which estimator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
pub enum EstimatorTag {
    /// True shrinkage weights applied to dealer coefficient estimates.
    Oracle,
    /// `g`, `sigma`, `p` known.
    S1,
    /// `sigma`, `p` known.
    S2,
    /// `p` and the range of `sigma^2` known.
    S3,
    /// Nothing known; analytic density cutoffs.
    S4,
    /// Nothing known; Sobolev density cutoffs.
    S5,
    /// Setting 1 without splitting.
    D,
    /// Setting 4 without splitting.
    S,
    /// Heteroscedasticity-ignoring baseline on `(X, Y)`.
    E,
}

impl EstimatorTag {
    pub const ALL: [EstimatorTag; 9] = [
        EstimatorTag::Oracle,
        EstimatorTag::S1,
        EstimatorTag::S2,
        EstimatorTag::S3,
        EstimatorTag::S4,
        EstimatorTag::S5,
        EstimatorTag::D,
        EstimatorTag::S,
        EstimatorTag::E,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorTag::Oracle => "oracle",
            EstimatorTag::S1 => "s1",
            EstimatorTag::S2 => "s2",
            EstimatorTag::S3 => "s3",
            EstimatorTag::S4 => "s4",
            EstimatorTag::S5 => "s5",
            EstimatorTag::D => "D",
            EstimatorTag::S => "S",
            EstimatorTag::E => "E",
        }
    }

    /// Split divisor of the group scheme; 1 means no splitting.
    pub fn divisor(self, no_split: bool) -> usize {
        match self {
            _ if no_split => 1,
            EstimatorTag::S1 | EstimatorTag::S2 | EstimatorTag::S3 => 7,
            EstimatorTag::S4 | EstimatorTag::S5 => 21,
            _ => 1,
        }
    }

    /// True when the estimator reads nuisance functions from the model.
    pub fn needs_model(self) -> bool {
        matches!(
            self,
            EstimatorTag::Oracle
                | EstimatorTag::S1
                | EstimatorTag::S2
                | EstimatorTag::S3
                | EstimatorTag::D
        )
    }
}

impl fmt::Display for EstimatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<EstimatorTag> for &'static str {
    fn from(tag: EstimatorTag) -> Self {
        tag.name()
    }
}

impl TryFrom<String> for EstimatorTag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for EstimatorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "oracle" => EstimatorTag::Oracle,
            "s1" => EstimatorTag::S1,
            "s2" => EstimatorTag::S2,
            "s3" => EstimatorTag::S3,
            "s4" | "s4_analytic" => EstimatorTag::S4,
            "s5" | "s5_sobolev" => EstimatorTag::S5,
            "D" | "d" | "no_split_D" => EstimatorTag::D,
            "S" | "no_split_S" => EstimatorTag::S,
            "E" | "e" | "e_baseline" => EstimatorTag::E,
            other => return Err(Error::Parse(format!("unknown estimator tag '{other}'"))),
        })
    }
}

/// Cutoff family for design density estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityFlag {
    #[default]
    Analytic,
    Sobolev,
}

impl FromStr for DensityFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(DensityFlag::Analytic),
            "sobolev" => Ok(DensityFlag::Sobolev),
            other => Err(Error::Parse(format!("unknown density flag '{other}'"))),
        }
    }
}

/// Density used in the block energy statistic of the known-design settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyDensity {
    /// `Y / p(X, Z)`.
    #[default]
    Joint,
    /// `(Y - g(Z)) / p(X)`.
    Marginal,
}

/// Design density of the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalSource {
    /// Projection estimate from `X` with cutoff `b_n`.
    #[default]
    Projection,
    /// The true marginal density of the model.
    Known,
}

/// Tuning knobs shared by the estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    /// Bounds `(c_lo, c_hi)` on `sigma^2`; required by settings 3 to 5.
    pub variance_bounds: Option<(f64, f64)>,
    /// Constant of the admissible interval for the difficulty estimate.
    pub c2: f64,
    /// Clamp the difficulty estimate into `[(c2 b_n)^{-1/4}, (c2 b_n)^{1/4}]`.
    pub project_difficulty: bool,
    pub fejer: FejerMeans,
    /// Nodes per axis of the grids holding estimated functions.
    pub grid_nodes: usize,
    /// Denominators below this value are raised to it and counted.
    pub guard_floor: f64,
    /// Without splitting, evaluate projection estimates at a row without
    /// that row's own term.
    pub exclude_self: bool,
    pub energy_density: EnergyDensity,
    /// Cutoff family of the no-split data-driven estimator.
    pub flag: DensityFlag,
    /// Run the split settings on the whole sample.
    pub no_split: bool,
    pub marginal: MarginalSource,
    /// Hard-threshold the coefficients of design density estimates.
    pub density_threshold: bool,
    /// Subtract a leave-one-frequency-out pilot in the baseline
    /// coefficient estimates.
    pub baseline_pilot: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            variance_bounds: None,
            c2: 1.0,
            project_difficulty: false,
            fejer: FejerMeans::Product,
            grid_nodes: 128,
            guard_floor: 1e-6,
            exclude_self: true,
            energy_density: EnergyDensity::Joint,
            flag: DensityFlag::Analytic,
            no_split: false,
            marginal: MarginalSource::Projection,
            density_threshold: true,
            baseline_pilot: true,
        }
    }
}

impl EstimatorOptions {
    pub(crate) fn bounds(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self
            .variance_bounds
            .ok_or_else(|| Error::Config("variance bounds (c_lo, c_hi) are required".into()))?;
        if !(lo > 0.0) || !(lo < hi) || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "variance bounds need 0 < c_lo < c_hi, got ({lo}, {hi})"
            )));
        }
        Ok((lo, hi))
    }
}

/// Floors small denominators and counts how often that happens.
pub(crate) struct Guard {
    floor: f64,
    events: Cell<usize>,
}

impl Guard {
    pub fn new(floor: f64) -> Self {
        Self {
            floor,
            events: Cell::new(0),
        }
    }

    pub fn apply(&self, value: f64, what: &str) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::Guard(format!("{what} is {value}")));
        }
        if value < self.floor {
            self.events.set(self.events.get() + 1);
            Ok(self.floor)
        } else {
            Ok(value)
        }
    }

    pub fn events(&self) -> usize {
        self.events.get()
    }
}

/// What an estimator may know about the generating model.
#[derive(Debug, Clone, Copy, Default)]
pub struct Nuisance<'a> {
    pub model: Option<&'a RegressionModel>,
    /// Precomputed coefficients of difficulty of `model`.
    pub difficulty: Option<Difficulty>,
}

impl<'a> Nuisance<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn known(model: &'a RegressionModel, difficulty: Difficulty) -> Self {
        Self {
            model: Some(model),
            difficulty: Some(difficulty),
        }
    }

    pub(crate) fn model(&self, tag: EstimatorTag) -> Result<&'a RegressionModel> {
        self.model
            .ok_or_else(|| Error::Config(format!("estimator {tag} needs the generating model")))
    }
}

/// Group scheme used by `tag` on a sample of size `n`.
pub fn scheme_for(tag: EstimatorTag, n: usize, opts: &EstimatorOptions) -> Result<BlockScheme> {
    build_scheme(n, tag.divisor(opts.no_split))
}

/// Fits estimator `tag` to `data`.
pub fn fit(
    tag: EstimatorTag,
    data: &SampledDataset,
    nuisance: Nuisance<'_>,
    opts: &EstimatorOptions,
) -> Result<SeriesEstimate> {
    let scheme = scheme_for(tag, data.len(), opts)?;
    let mut est = match tag {
        EstimatorTag::Oracle => {
            let model = nuisance.model(tag)?;
            let dealer = fit_known(EstimatorTag::D, data, &scheme, nuisance, opts)?;
            let theta = true_coefficients(model, scheme.coefficient_count())?;
            let d = known::difficulty_of(model, nuisance)?.d;
            let mut est = apply_oracle(dealer.raw_coefficients, &theta, d, &scheme)?;
            est.guard_events = dealer.guard_events;
            est
        }
        EstimatorTag::S1 | EstimatorTag::S2 | EstimatorTag::S3 | EstimatorTag::D => {
            fit_known(tag, data, &scheme, nuisance, opts)?
        }
        EstimatorTag::S4 => fit_adaptive(data, &scheme, DensityFlag::Analytic, opts)?,
        EstimatorTag::S5 => fit_adaptive(data, &scheme, DensityFlag::Sobolev, opts)?,
        EstimatorTag::S => fit_adaptive(data, &scheme, opts.flag, opts)?,
        EstimatorTag::E => fit_baseline(data, &scheme, nuisance, opts)?,
    };
    est.estimator = tag.name().to_string();
    Ok(est)
}
