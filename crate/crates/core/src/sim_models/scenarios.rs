//! The simulation grid: bell-shaped regression, exponential scale
//! `exp(lambda z / 2)`, uniform design on the unit square, standard normal
//! errors, and additive components `g0 = 0`, `g1`, `g2`, `g3`.

use super::model::{ModelResolution, RegressionModel};
use super::spec::{
    AdditiveSpec, DesignSpec, ErrorLaw, RegressionSpec, ResponseKind, ScaleSpec, ScenarioSpec,
};
use crate::error::{Error, Result};

pub const PAPER_LAMBDAS: [f64; 3] = [1.0, 2.0, 3.0];

fn lambda_label(lambda: f64) -> String {
    if lambda.fract() == 0.0 {
        format!("{}", lambda as i64)
    } else {
        format!("{lambda}")
    }
}

/// Continuous scenario with scale `exp(lambda z / 2)` and additive
/// component `g`.
pub fn exponential_scenario(lambda: f64, g: AdditiveSpec) -> ScenarioSpec {
    ScenarioSpec {
        name: format!("lambda{}-g{}", lambda_label(lambda), g.index()),
        aux_dim: 1,
        response: ResponseKind::Continuous,
        regression: RegressionSpec::standard_bell(),
        additive: g,
        scale: ScaleSpec::Exponential { lambda },
        design: DesignSpec::Uniform,
        error: ErrorLaw::Normal,
    }
}

pub fn bernoulli_scenario() -> ScenarioSpec {
    ScenarioSpec {
        name: "bernoulli".into(),
        aux_dim: 1,
        response: ResponseKind::Bernoulli,
        regression: RegressionSpec::bell_between(0.1, 0.9),
        additive: AdditiveSpec::Zero,
        scale: ScaleSpec::default(),
        design: DesignSpec::Uniform,
        error: ErrorLaw::Normal,
    }
}

pub fn poisson_scenario() -> ScenarioSpec {
    ScenarioSpec {
        name: "poisson".into(),
        aux_dim: 1,
        response: ResponseKind::Poisson,
        regression: RegressionSpec::bell_above(0.5),
        additive: AdditiveSpec::Zero,
        scale: ScaleSpec::default(),
        design: DesignSpec::Uniform,
        error: ErrorLaw::Normal,
    }
}

/// Specs of every built-in scenario: the twelve cells of the grid, the
/// homoscedastic `unit` case, and the Bernoulli and Poisson demos.
pub fn builtin_specs() -> Vec<ScenarioSpec> {
    let mut out = Vec::new();
    for &lambda in &PAPER_LAMBDAS {
        for g in 0..4 {
            out.push(exponential_scenario(
                lambda,
                AdditiveSpec::from_index(g).expect("index in range"),
            ));
        }
    }
    let mut unit = exponential_scenario(0.0, AdditiveSpec::Zero);
    unit.name = "unit".into();
    unit.scale = ScaleSpec::Constant { value: 1.0 };
    out.push(unit);
    out.push(bernoulli_scenario());
    out.push(poisson_scenario());
    out
}

pub fn builtin_spec(name: &str) -> Result<ScenarioSpec> {
    builtin_specs()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))
}

pub fn builtin_scenarios() -> Result<Vec<RegressionModel>> {
    builtin_specs()
        .iter()
        .map(|s| RegressionModel::from_spec(s, ModelResolution::default()))
        .collect()
}
