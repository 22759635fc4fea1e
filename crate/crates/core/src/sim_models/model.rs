//! Generating models on quadrature grids.

use serde::{Deserialize, Serialize};

use super::sampling::check_error_moments;
use super::spec::{DesignSpec, ErrorLaw, ResponseKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::function_space::{GridFunction, DEFAULT_NODES_1D, DEFAULT_NODES_ND};

const DENSITY_TOL: f64 = 1e-6;
const CENTERING_TOL: f64 = 1e-6;
const MOMENT_DRAWS: usize = 1_000_000;
const MOMENT_SEED: u64 = 0x5eed;

/// Node counts used when sampling closed-form components onto grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResolution {
    pub nodes_1d: usize,
    pub nodes_nd: usize,
}

impl Default for ModelResolution {
    fn default() -> Self {
        Self {
            nodes_1d: DEFAULT_NODES_1D,
            nodes_nd: DEFAULT_NODES_ND,
        }
    }
}

/// How covariates are drawn from the design density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignSampler {
    Uniform,
    /// Independent linear marginals, drawn by exact inverse CDF.
    Product {
        x_slope: f64,
        z_slope: f64,
    },
    /// Rejection from the uniform proposal with the grid maximum as envelope.
    Rejection {
        envelope: f64,
    },
}

/// Grid-valued pieces of a model, before validation.
#[derive(Debug, Clone)]
pub struct ModelParts {
    pub name: String,
    pub response: ResponseKind,
    pub error_law: ErrorLaw,
    /// `f` on `[0, 1]`.
    pub regression: GridFunction,
    /// `g` on `[0, 1]^D`.
    pub additive: GridFunction,
    /// `sigma` on `[0, 1]^{1+D}`; replaced by the implied scale for
    /// discrete responses.
    pub scale: GridFunction,
    /// Joint design density on `[0, 1]^{1+D}`.
    pub density: GridFunction,
}

/// The generating quintuple `(f, g, sigma, p, error law)` with the response
/// kind. Invariants are checked at construction.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    name: String,
    response: ResponseKind,
    error_law: ErrorLaw,
    regression: GridFunction,
    additive: GridFunction,
    scale: GridFunction,
    density: GridFunction,
    marginal: GridFunction,
    sampler: DesignSampler,
}

impl RegressionModel {
    /// Validates grid-valued parts; covariates are drawn by rejection.
    pub fn from_parts(parts: ModelParts) -> Result<Self> {
        let envelope = parts.density.max();
        Self::build(parts, DesignSampler::Rejection { envelope })
    }

    /// Samples closed-form components onto grids and validates them.
    pub fn from_spec(spec: &ScenarioSpec, res: ModelResolution) -> Result<Self> {
        spec.design.validate()?;
        if spec.aux_dim == 0 {
            return Err(Error::Model(
                "at least one auxiliary covariate is required".into(),
            ));
        }
        let d = spec.aux_dim;
        let regression = GridFunction::from_fn(1, res.nodes_1d, |p| spec.regression.eval(p[0]))?;
        let g_nodes = if d == 1 { res.nodes_1d } else { res.nodes_nd };
        let raw = GridFunction::from_fn(d, g_nodes, |z| spec.additive.eval(z[0]))?;
        // remove the quadrature residue of the zero integral
        let shift = raw.integral();
        let additive = raw.map(|v| v - shift)?;
        let scale = GridFunction::from_fn(1 + d, res.nodes_nd, |p| spec.scale.eval(p[0], &p[1..]))?;
        let density =
            GridFunction::from_fn(1 + d, res.nodes_nd, |p| spec.design.eval(p[0], &p[1..]))?;
        let sampler = match spec.design {
            DesignSpec::Uniform => DesignSampler::Uniform,
            DesignSpec::Product { x_slope, z_slope } => DesignSampler::Product { x_slope, z_slope },
            DesignSpec::Tilted { .. } => DesignSampler::Rejection {
                envelope: density.max(),
            },
        };
        Self::build(
            ModelParts {
                name: spec.name.clone(),
                response: spec.response,
                error_law: spec.error,
                regression,
                additive,
                scale,
                density,
            },
            sampler,
        )
    }

    fn build(parts: ModelParts, sampler: DesignSampler) -> Result<Self> {
        let ModelParts {
            name,
            response,
            error_law,
            regression,
            additive,
            mut scale,
            density,
        } = parts;
        if regression.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: regression.dim(),
            });
        }
        let d = additive.dim();
        for grid in [&scale, &density] {
            if grid.dim() != 1 + d {
                return Err(Error::DimensionMismatch {
                    expected: 1 + d,
                    got: grid.dim(),
                });
            }
        }
        if scale.nodes() != density.nodes() {
            return Err(Error::InvalidGrid(
                "scale and density must share a grid".into(),
            ));
        }
        error_law.validate()?;
        if error_law != ErrorLaw::Normal {
            let report = check_error_moments(error_law, MOMENT_DRAWS, MOMENT_SEED)?;
            if !report.passed {
                return Err(Error::Model(format!(
                    "error law {error_law:?} fails the moment check: {report:?}"
                )));
            }
        }

        if density.min() < 0.0 {
            return Err(Error::Model(format!(
                "design density takes the negative value {}",
                density.min()
            )));
        }
        let mass = density.integral();
        if (mass - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Model(format!(
                "design density integrates to {mass}, not 1"
            )));
        }
        let g_mean = additive.integral();
        if g_mean.abs() > CENTERING_TOL {
            return Err(Error::Model(format!(
                "additive component integrates to {g_mean}, not 0"
            )));
        }

        // mean on the joint grid, used by the bona fide checks and the
        // implied discrete scales
        let nodes = density.nodes();
        let mean = GridFunction::from_fn(1 + d, nodes, |p| {
            regression.eval(&p[..1]) + additive.eval(&p[1..])
        })?;
        match response {
            ResponseKind::Continuous => {}
            ResponseKind::Bernoulli => {
                if mean.min() <= 0.0 || mean.max() >= 1.0 {
                    return Err(Error::Model(format!(
                        "Bernoulli mean must stay inside (0, 1); range is [{}, {}]",
                        mean.min(),
                        mean.max()
                    )));
                }
                scale = mean.map(|q| (q * (1.0 - q)).sqrt())?;
            }
            ResponseKind::Poisson => {
                if mean.min() <= 0.0 {
                    return Err(Error::Model(format!(
                        "Poisson mean must be positive; minimum is {}",
                        mean.min()
                    )));
                }
                scale = mean.map(f64::sqrt)?;
            }
        }
        if scale.min() <= 0.0 {
            return Err(Error::Model(format!(
                "scale must be positive; minimum is {}",
                scale.min()
            )));
        }
        let marginal = density.integrate_trailing()?;
        Ok(Self {
            name,
            response,
            error_law,
            regression,
            additive,
            scale,
            density,
            marginal,
            sampler,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn aux_dim(&self) -> usize {
        self.additive.dim()
    }

    pub fn response(&self) -> ResponseKind {
        self.response
    }

    pub fn error_law(&self) -> ErrorLaw {
        self.error_law
    }

    pub fn sampler(&self) -> DesignSampler {
        self.sampler
    }

    pub fn regression(&self) -> &GridFunction {
        &self.regression
    }

    pub fn additive(&self) -> &GridFunction {
        &self.additive
    }

    pub fn scale(&self) -> &GridFunction {
        &self.scale
    }

    pub fn density(&self) -> &GridFunction {
        &self.density
    }

    /// Marginal density of `X`.
    pub fn marginal(&self) -> &GridFunction {
        &self.marginal
    }

    pub fn regression_at(&self, x: f64) -> f64 {
        self.regression.eval_split(x, &[])
    }

    pub fn additive_at(&self, z: &[f64]) -> f64 {
        self.additive.eval(z)
    }

    pub fn mean_at(&self, x: f64, z: &[f64]) -> f64 {
        self.regression_at(x) + self.additive_at(z)
    }

    pub fn scale_at(&self, x: f64, z: &[f64]) -> f64 {
        self.scale.eval_split(x, z)
    }

    pub fn density_at(&self, x: f64, z: &[f64]) -> f64 {
        self.density.eval_split(x, z)
    }

    pub fn marginal_at(&self, x: f64) -> f64 {
        self.marginal.eval_split(x, &[])
    }

    /// `sigma^{-2}` on the joint grid.
    pub fn inverse_variance(&self) -> Result<GridFunction> {
        self.scale.map(|s| 1.0 / (s * s))
    }

    /// Squared scale on the joint grid.
    pub fn variance(&self) -> Result<GridFunction> {
        self.scale.map(|s| s * s)
    }

    /// Range `[min sigma^2, max sigma^2]` over the grid.
    pub fn variance_range(&self) -> (f64, f64) {
        let lo = self.scale.min();
        let hi = self.scale.max();
        (lo * lo, hi * hi)
    }

    /// True when the scale does not vary with the auxiliary covariates.
    pub fn scale_free_of_aux(&self) -> bool {
        self.scale
            .depends_on_first_axis_only(1e-12 * self.scale.sup_norm().max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_models::spec::{AdditiveSpec, RegressionSpec, ScaleSpec};
    use approx::assert_abs_diff_eq;

    fn spec() -> ScenarioSpec {
        ScenarioSpec {
            name: "t".into(),
            aux_dim: 1,
            response: ResponseKind::Continuous,
            regression: RegressionSpec::standard_bell(),
            additive: AdditiveSpec::Quadratic,
            scale: ScaleSpec::Exponential { lambda: 2.0 },
            design: DesignSpec::Uniform,
            error: ErrorLaw::Normal,
        }
    }

    #[test]
    fn closed_form_model() {
        let m = RegressionModel::from_spec(&spec(), ModelResolution::default()).unwrap();
        assert_abs_diff_eq!(m.additive().integral(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            m.scale_at(0.5, &[1.0 - 0.5 / 128.0]),
            (1.0f64 - 0.5 / 128.0).exp(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(m.marginal_at(0.3), 1.0, epsilon = 1e-12);
        assert!(!m.scale_free_of_aux());
    }

    #[test]
    fn bernoulli_bona_fide() {
        let mut s = spec();
        s.response = ResponseKind::Bernoulli;
        s.regression = RegressionSpec::Constant { value: 0.9 };
        s.additive = AdditiveSpec::Linear;
        assert!(matches!(
            RegressionModel::from_spec(&s, ModelResolution::default()),
            Err(Error::Model(_))
        ));
        s.regression = RegressionSpec::Constant { value: 0.3 };
        s.additive = AdditiveSpec::Zero;
        let m = RegressionModel::from_spec(&s, ModelResolution::default()).unwrap();
        assert_abs_diff_eq!(m.scale_at(0.2, &[0.7]), (0.21f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn poisson_scale() {
        let mut s = spec();
        s.response = ResponseKind::Poisson;
        s.regression = RegressionSpec::Constant { value: 2.0 };
        s.additive = AdditiveSpec::Zero;
        let m = RegressionModel::from_spec(&s, ModelResolution::default()).unwrap();
        assert_abs_diff_eq!(m.scale_at(0.2, &[0.7]), 2f64.sqrt(), epsilon = 1e-12);
        s.regression = RegressionSpec::Constant { value: 0.2 };
        s.additive = AdditiveSpec::Linear;
        assert!(RegressionModel::from_spec(&s, ModelResolution::default()).is_err());
    }

    #[test]
    fn bad_design() {
        let mut s = spec();
        s.design = DesignSpec::Tilted { amplitude: 1.5 };
        assert!(RegressionModel::from_spec(&s, ModelResolution::default()).is_err());
    }

    #[test]
    fn unnormalized_density_rejected() {
        let parts = ModelParts {
            name: "bad".into(),
            response: ResponseKind::Continuous,
            error_law: ErrorLaw::Normal,
            regression: GridFunction::constant(1, 16, 0.0).unwrap(),
            additive: GridFunction::constant(1, 16, 0.0).unwrap(),
            scale: GridFunction::constant(2, 16, 1.0).unwrap(),
            density: GridFunction::constant(2, 16, 1.1).unwrap(),
        };
        assert!(RegressionModel::from_parts(parts).is_err());
    }
}
