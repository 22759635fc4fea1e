//! Experiment configuration: a TOML file whose values command-line flags
//! can override.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorOptions, EstimatorTag};
use crate::sim_models::{
    builtin_spec, exponential_scenario, AdditiveSpec, ModelResolution, RegressionModel,
    ScenarioSpec, PAPER_LAMBDAS,
};

/// Smallest sample size accepted when an estimator splits the sample.
pub const MIN_SPLIT_N: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in scenario names; when empty, the exponential-scale scenarios
    /// for `lambda` are used.
    pub scenario: Vec<String>,
    /// Inline scenario definitions, used alongside `scenario`.
    pub model: Vec<ScenarioSpec>,
    pub lambda: Vec<f64>,
    /// Additive components `g_1..g_3` whose data-driven and dealer fits are
    /// compared; the base cells always use the scenario's own component.
    pub g: Vec<usize>,
    pub n: Vec<usize>,
    /// Estimators fitted in every cell on top of the ratio-table set.
    pub extra_estimators: Vec<EstimatorTag>,
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out: PathBuf,
    pub resolution: ModelResolution,
    pub estimator: EstimatorOptions,
    /// Smoothness and radius of the Sobolev class used by the bounds.
    pub alpha: f64,
    pub q: f64,
    /// Constant pivot of discrete-response bounds; the model's own mean
    /// when absent.
    pub pivot: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Vec::new(),
            model: Vec::new(),
            lambda: PAPER_LAMBDAS.to_vec(),
            g: Vec::new(),
            n: vec![100, 200, 400],
            extra_estimators: Vec::new(),
            reps: 200,
            seed: 1,
            workers: 0,
            out: PathBuf::from("out"),
            resolution: ModelResolution::default(),
            estimator: EstimatorOptions::default(),
            alpha: 1.0,
            q: 1.0,
            pivot: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Base scenarios of the experiment in configuration order.
    pub fn scenarios(&self) -> Result<Vec<ScenarioSpec>> {
        let mut out: Vec<ScenarioSpec> = self
            .scenario
            .iter()
            .map(|name| builtin_spec(name))
            .collect::<Result<_>>()?;
        out.extend(self.model.iter().cloned());
        if out.is_empty() {
            out = self
                .lambda
                .iter()
                .map(|&l| exponential_scenario(l, AdditiveSpec::Zero))
                .collect();
        }
        let mut names: Vec<&str> = out.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("scenario names must be unique".into()));
        }
        Ok(out)
    }

    pub fn additive_components(&self) -> Result<Vec<AdditiveSpec>> {
        self.g
            .iter()
            .map(|&i| AdditiveSpec::from_index(i))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n.is_empty() {
            return Err(Error::Config("at least one sample size is required".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0) {
            return Err(Error::Config(format!("sample size {n} must be positive")));
        }
        if let Some(l) = self.lambda.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Config(format!(
                "lambda {l} must be finite and nonnegative"
            )));
        }
        let splits = self
            .extra_estimators
            .iter()
            .any(|t| t.divisor(self.estimator.no_split) > 1);
        if splits {
            if let Some(&n) = self.n.iter().find(|&&n| n < MIN_SPLIT_N) {
                return Err(Error::Config(format!(
                    "sample size {n} below {MIN_SPLIT_N} with a splitting estimator"
                )));
            }
        }
        if !(self.alpha >= 1.0) || !(self.q > 0.0) {
            return Err(Error::Config(format!(
                "bounds need alpha >= 1 and q > 0, got {} and {}",
                self.alpha, self.q
            )));
        }
        self.additive_components()?;
        self.scenarios()?;
        Ok(())
    }

    /// Estimator options for `model`: variance bounds default to the model's
    /// range of `sigma^2`, widened by a factor 2 when that range is a point.
    pub fn options_for(&self, model: &RegressionModel) -> EstimatorOptions {
        let mut opts = self.estimator.clone();
        if opts.variance_bounds.is_none() {
            opts.variance_bounds = Some(default_variance_bounds(model));
        }
        opts
    }
}

pub fn default_variance_bounds(model: &RegressionModel) -> (f64, f64) {
    let (lo, hi) = model.variance_range();
    if hi > lo {
        (lo, hi)
    } else {
        (lo / 2.0, hi * 2.0)
    }
}

/// `spec` with its additive component replaced by `g`.
pub fn with_additive(spec: &ScenarioSpec, g: AdditiveSpec) -> ScenarioSpec {
    let mut out = spec.clone();
    out.additive = g;
    let base = spec
        .name
        .strip_suffix(&format!("-g{}", spec.additive.index()))
        .unwrap_or(&spec.name);
    out.name = format!("{base}-g{}", g.index());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_toml_round_trip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.scenarios().unwrap().len(), 3);
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parses_partial_file() {
        let c = ExperimentConfig::from_toml(
            r#"
            scenario = ["unit"]
            n = [50, 100]
            reps = 10
            extra_estimators = ["s3"]
            [estimator]
            no_split = true
            flag = "sobolev"
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.scenarios().unwrap()[0].name, "unit");
        assert!(c.estimator.no_split);
        assert_eq!(c.seed, 1);
    }

    #[test]
    fn rejects_invalid() {
        let bad = |text: &str| ExperimentConfig::from_toml(text).and_then(|c| c.validate());
        assert!(bad("reps = 0").is_err());
        assert!(bad("n = [0]").is_err());
        assert!(bad("g = [5]").is_err());
        assert!(bad("scenario = [\"nope\"]").is_err());
        assert!(bad("extra_estimators = [\"s1\"]\nn = [20]").is_err());
        assert!(bad("unknown_key = 3").is_err());
    }

    #[test]
    fn additive_renaming() {
        let s = exponential_scenario(2.0, AdditiveSpec::Zero);
        assert_eq!(with_additive(&s, AdditiveSpec::Cubic).name, "lambda2-g3");
        let mut u = s.clone();
        u.name = "unit".into();
        assert_eq!(with_additive(&u, AdditiveSpec::Linear).name, "unit-g1");
    }
}
