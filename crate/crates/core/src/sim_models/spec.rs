//! Serializable descriptions of the generating model components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the bell-shaped test regression.
pub const BELL_WIDTH: f64 = 0.15;

/// Unit-height bell `exp(-(x - 1/2)^2 / (2 w^2))`.
pub fn bell(x: f64) -> f64 {
    let u = (x - 0.5) / BELL_WIDTH;
    (-0.5 * u * u).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressionSpec {
    /// `offset + height * bell(x)`.
    Bell {
        height: f64,
        offset: f64,
    },
    Constant {
        value: f64,
    },
    /// Finite cosine sum `sum_j c_j phi_j(x)`.
    Cosine {
        coefficients: Vec<f64>,
    },
}

impl RegressionSpec {
    /// Bell of peak height 2 used for continuous responses.
    pub fn standard_bell() -> Self {
        RegressionSpec::Bell {
            height: 2.0,
            offset: 0.0,
        }
    }

    /// Bell rescaled so that its range over `[0, 1]` is exactly `[lo, hi]`.
    pub fn bell_between(lo: f64, hi: f64) -> Self {
        let edge = bell(0.0);
        let height = (hi - lo) / (1.0 - edge);
        RegressionSpec::Bell {
            height,
            offset: lo - height * edge,
        }
    }

    /// Height-2 bell shifted so that its minimum over `[0, 1]` is `floor`.
    pub fn bell_above(floor: f64) -> Self {
        RegressionSpec::Bell {
            height: 2.0,
            offset: floor - 2.0 * bell(0.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RegressionSpec::Bell { height, offset } => offset + height * bell(x),
            RegressionSpec::Constant { value } => *value,
            RegressionSpec::Cosine { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(j, c)| c * crate::function_space::phi(j, x))
                .sum(),
        }
    }
}

/// Additive nuisance component, a function of the first auxiliary
/// coordinate with zero integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditiveSpec {
    #[default]
    Zero,
    /// `z - 1/2`
    Linear,
    /// `z^2 - 1/3`
    Quadratic,
    /// `z + z^3 - 3/4`
    Cubic,
}

impl AdditiveSpec {
    pub fn eval(self, z: f64) -> f64 {
        match self {
            AdditiveSpec::Zero => 0.0,
            AdditiveSpec::Linear => z - 0.5,
            AdditiveSpec::Quadratic => z * z - 1.0 / 3.0,
            AdditiveSpec::Cubic => z + z * z * z - 0.75,
        }
    }

    /// Index used on the command line: 0 for zero, 1..3 for the others.
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(AdditiveSpec::Zero),
            1 => Ok(AdditiveSpec::Linear),
            2 => Ok(AdditiveSpec::Quadratic),
            3 => Ok(AdditiveSpec::Cubic),
            _ => Err(Error::InvalidParameter(format!(
                "additive component index {i} not in 0..=3"
            ))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            AdditiveSpec::Zero => 0,
            AdditiveSpec::Linear => 1,
            AdditiveSpec::Quadratic => 2,
            AdditiveSpec::Cubic => 3,
        }
    }
}

/// Scale function `sigma(x, z)`; ignored for discrete responses, whose
/// scale is implied by the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleSpec {
    Constant {
        value: f64,
    },
    /// `exp(lambda * z1 / 2)`
    Exponential {
        lambda: f64,
    },
    /// `intercept + slope * x`, free of the auxiliary covariates.
    Linear {
        intercept: f64,
        slope: f64,
    },
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec::Constant { value: 1.0 }
    }
}

impl ScaleSpec {
    pub fn eval(&self, x: f64, z: &[f64]) -> f64 {
        match *self {
            ScaleSpec::Constant { value } => value,
            ScaleSpec::Exponential { lambda } => (0.5 * lambda * z[0]).exp(),
            ScaleSpec::Linear { intercept, slope } => intercept + slope * x,
        }
    }
}

/// Design density of `(X, Z)` on the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSpec {
    #[default]
    Uniform,
    /// Independent coordinates with linear marginals `1 + s (u - 1/2)`,
    /// slope `x_slope` for `X` and `z_slope` for every auxiliary coordinate.
    Product { x_slope: f64, z_slope: f64 },
    /// `1 + a cos(pi x) cos(pi z1)`, sampled by rejection.
    Tilted { amplitude: f64 },
}

impl DesignSpec {
    pub fn eval(&self, x: f64, z: &[f64]) -> f64 {
        use std::f64::consts::PI;
        match *self {
            DesignSpec::Uniform => 1.0,
            DesignSpec::Product { x_slope, z_slope } => {
                let mut p = 1.0 + x_slope * (x - 0.5);
                for &v in z {
                    p *= 1.0 + z_slope * (v - 0.5);
                }
                p
            }
            DesignSpec::Tilted { amplitude } => {
                1.0 + amplitude * (PI * x).cos() * (PI * z[0]).cos()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DesignSpec::Uniform => Ok(()),
            DesignSpec::Product { x_slope, z_slope } => {
                if x_slope.abs() >= 2.0 || z_slope.abs() >= 2.0 {
                    return Err(Error::Model(format!(
                        "linear marginal slopes must lie in (-2, 2), got {x_slope} and {z_slope}"
                    )));
                }
                Ok(())
            }
            DesignSpec::Tilted { amplitude } => {
                if amplitude.abs() >= 1.0 {
                    return Err(Error::Model(format!(
                        "tilt amplitude must lie in (-1, 1), got {amplitude}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Standardized regression error: zero mean, unit variance, finite fourth
/// moment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorLaw {
    #[default]
    Normal,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
    /// Student t rescaled to unit variance; `df >= 5`.
    StudentT { df: f64 },
    /// `+1` or `-1` with equal probability.
    TwoPoint,
}

impl ErrorLaw {
    pub fn validate(&self) -> Result<()> {
        if let ErrorLaw::StudentT { df } = *self {
            if !(df >= 5.0) {
                return Err(Error::Model(format!(
                    "Student t errors need df >= 5 for a finite fourth moment, got {df}"
                )));
            }
        }
        Ok(())
    }

    /// Exact fourth moment of the standardized law.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            ErrorLaw::Normal => 3.0,
            ErrorLaw::Uniform => 9.0 / 5.0,
            ErrorLaw::StudentT { df } => 3.0 * (df - 2.0) / (df - 4.0),
            ErrorLaw::TwoPoint => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    #[default]
    Continuous,
    Bernoulli,
    Poisson,
}

/// Complete description of a generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default = "one")]
    pub aux_dim: usize,
    #[serde(default)]
    pub response: ResponseKind,
    pub regression: RegressionSpec,
    #[serde(default)]
    pub additive: AdditiveSpec,
    #[serde(default)]
    pub scale: ScaleSpec,
    #[serde(default)]
    pub design: DesignSpec,
    #[serde(default)]
    pub error: ErrorLaw,
}

fn one() -> usize {
    1
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Mean response `f(x) + g(z)`.
    pub fn mean(&self, x: f64, z: &[f64]) -> f64 {
        self.regression.eval(x) + self.additive.eval(z[0])
    }
}
