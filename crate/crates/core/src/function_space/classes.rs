//! Sobolev-type function classes, the Pinsker constant and finite-truncation
//! checks of class membership.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::series::CosineSeries;
use crate::error::{Error, Result};

/// Sharp constant of the minimax MISE over the Sobolev ellipsoid of order
/// `alpha` and radius `q`:
/// `[alpha / (pi (alpha + 1))]^{2 alpha / (2 alpha + 1)} [q (2 alpha + 1)]^{1 / (2 alpha + 1)}`.
pub fn pinsker_constant(alpha: f64, q: f64) -> Result<f64> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must be >= 1"
        )));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("Q = {q} must be positive")));
    }
    let r = 2.0 * alpha + 1.0;
    Ok((alpha / (PI * (alpha + 1.0))).powf(2.0 * alpha / r) * (q * r).powf(1.0 / r))
}

/// Sobolev weight `1 + (pi j)^{2 alpha}`.
pub fn sobolev_weight(j: usize, alpha: f64) -> f64 {
    1.0 + (PI * j as f64).powf(2.0 * alpha)
}

/// Parameters of the family of univariate regression functions pinned to a
/// pivot on the first `m_n` frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFamilySpec {
    pub pivot: GridFunction,
    /// Sup-norm radius of the high-frequency part; `f64::INFINITY` for none.
    pub rho: f64,
    pub m_n: usize,
    pub alpha: f64,
    pub q: f64,
}

impl FunctionFamilySpec {
    pub fn new(pivot: GridFunction, rho: f64, m_n: usize, alpha: f64, q: f64) -> Result<Self> {
        if pivot.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: pivot.dim(),
            });
        }
        if !(alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must be >= 1"
            )));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("Q = {q} must be positive")));
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho = {rho} must be positive"
            )));
        }
        Ok(Self {
            pivot,
            rho,
            m_n,
            alpha,
            q,
        })
    }

    /// The classical Sobolev ellipsoid: zero pivot, no sup-norm constraint,
    /// nothing pinned.
    pub fn sobolev(nodes: usize, alpha: f64, q: f64) -> Result<Self> {
        Self::new(
            GridFunction::constant(1, nodes, 0.0)?,
            f64::INFINITY,
            0,
            alpha,
            q,
        )
    }
}

/// Outcome of a finite-truncation membership check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    /// Largest |theta_j(f) - theta_j(f0)| over `j < m_n`.
    pub pivot_deviation: f64,
    pub pivot_ok: bool,
    /// `sum_{m_n <= j < truncation} [1 + (pi j)^{2 alpha}] theta_j^2`.
    pub ellipsoid_sum: f64,
    pub ellipsoid_ok: bool,
    /// Grid sup-norm of `sum_{m_n <= j < truncation} theta_j phi_j`.
    pub tail_sup_norm: f64,
    pub sup_norm_ok: bool,
    pub truncation: usize,
    /// Frequencies at or above `truncation` are not examined.
    pub tail_unverified: bool,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.pivot_ok && self.ellipsoid_ok && self.sup_norm_ok
    }

    /// Names of the violated conditions.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.pivot_ok {
            v.push("pivot");
        }
        if !self.ellipsoid_ok {
            v.push("ellipsoid");
        }
        if !self.sup_norm_ok {
            v.push("sup_norm");
        }
        v
    }
}

/// Checks the three defining conditions of the family on frequencies below
/// `truncation`; `tol` is the allowed deviation from pivot coefficients.
pub fn family_membership(
    f: &GridFunction,
    spec: &FunctionFamilySpec,
    truncation: usize,
    tol: f64,
) -> Result<MembershipReport> {
    if f.dim() != 1 || f.nodes() != spec.pivot.nodes() {
        return Err(Error::InvalidGrid(
            "function and pivot must share a univariate grid".into(),
        ));
    }
    let truncation = truncation.max(spec.m_n).min(f.nodes() / 2);
    let theta = CosineSeries::from_grid(f, &[truncation])?;
    let pivot = CosineSeries::from_grid(&spec.pivot, &[truncation])?;

    let pivot_deviation = (0..spec.m_n.min(truncation))
        .map(|j| (theta.coefficients()[j] - pivot.coefficients()[j]).abs())
        .fold(0.0, f64::max);

    let mut tail = vec![0.0; truncation];
    let mut ellipsoid_sum = 0.0;
    for j in spec.m_n..truncation {
        let t = theta.coefficients()[j];
        tail[j] = t;
        ellipsoid_sum += sobolev_weight(j, spec.alpha) * t * t;
    }
    let tail_sup_norm = CosineSeries::univariate(tail)
        .to_grid(f.nodes())?
        .sup_norm();

    Ok(MembershipReport {
        pivot_deviation,
        pivot_ok: pivot_deviation <= tol,
        ellipsoid_sum,
        ellipsoid_ok: ellipsoid_sum <= spec.q,
        tail_sup_norm,
        sup_norm_ok: spec.rho.is_infinite() || tail_sup_norm < spec.rho,
        truncation,
        tail_unverified: true,
    })
}

/// Smoothness classes for design densities and additive components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothnessClassSpec {
    /// `k`-variate Sobolev class:
    /// `sum [1 + sum_s (2 pi i_s)^{2k}] q_i^2 <= bound`.
    Sobolev { order: usize, bound: f64 },
    /// Analytic class: `|pi_{i s}| <= bound / [e^{rate_0 i} + sum_t e^{rate_t s_t}]`.
    Analytic { rates: Vec<f64>, bound: f64 },
}

impl SmoothnessClassSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SmoothnessClassSpec::Sobolev { order, bound } => {
                if *order == 0 || !(*bound > 0.0) || !bound.is_finite() {
                    return Err(Error::InvalidParameter(
                        "Sobolev class needs order >= 1 and a finite positive bound".into(),
                    ));
                }
            }
            SmoothnessClassSpec::Analytic { rates, bound } => {
                if rates.is_empty() || rates.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "analytic rates must be strictly positive".into(),
                    ));
                }
                if !(*bound > 0.0) || !bound.is_finite() {
                    return Err(Error::InvalidParameter(
                        "analytic bound must be finite and positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Tests the class condition on the stored (finite) coefficients.
    pub fn contains(&self, coefs: &CosineSeries) -> Result<bool> {
        self.validate()?;
        match self {
            SmoothnessClassSpec::Sobolev { order, bound } => {
                let p = 2 * *order as i32;
                let s: f64 = coefs
                    .iter()
                    .map(|(idx, c)| {
                        let w = 1.0
                            + idx
                                .iter()
                                .map(|&i| (2.0 * PI * i as f64).powi(p))
                                .sum::<f64>();
                        w * c * c
                    })
                    .sum();
                Ok(s <= *bound)
            }
            SmoothnessClassSpec::Analytic { rates, bound } => {
                if rates.len() != coefs.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: coefs.dim(),
                        got: rates.len(),
                    });
                }
                Ok(coefs.iter().all(|(idx, c)| {
                    let first = (rates[0] * idx[0] as f64).exp();
                    let rest: f64 = idx[1..]
                        .iter()
                        .zip(&rates[1..])
                        .map(|(&s, &r)| (r * s as f64).exp())
                        .sum();
                    c.abs() <= bound / (first + rest)
                }))
            }
        }
    }
}

/// Finite-truncation values of the design and additive-component regularity
/// sums. Reported for inspection only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionDiagnostics {
    /// `sum |pi_{j s}|` over all `(j, s)` with every frequency `<= truncation`.
    pub density_abs_sum: f64,
    /// `sum_j sum_{||s||_inf > truncation} pi_{j s}^2`, up to grid resolution.
    pub density_tail_sum: f64,
    /// `sum_{||s||_inf > truncation} gamma_s^2`, up to grid resolution.
    pub additive_tail_sum: f64,
    pub truncation: usize,
    /// Highest frequency examined on each axis.
    pub resolution_limit: usize,
}

/// Computes the regularity sums for a joint density `p(x, z)` and an additive
/// component `g(z)`.
pub fn assumption_diagnostics(
    p: &GridFunction,
    g: &GridFunction,
    truncation: usize,
) -> Result<AssumptionDiagnostics> {
    if p.dim() != g.dim() + 1 {
        return Err(Error::DimensionMismatch {
            expected: g.dim() + 1,
            got: p.dim(),
        });
    }
    let limit = p.nodes().min(g.nodes()) / 2;
    if truncation + 1 > limit {
        return Err(Error::Resolution {
            frequency: truncation,
            nodes: p.nodes().min(g.nodes()),
        });
    }
    let head = CosineSeries::from_grid(p, &vec![truncation + 1; p.dim()])?;
    let density_abs_sum = head.coefficients().iter().map(|c| c.abs()).sum();

    let full_p = CosineSeries::from_grid(p, &vec![limit; p.dim()])?;
    let density_tail_sum = full_p
        .iter()
        .filter(|(idx, _)| idx[1..].iter().copied().max().unwrap_or(0) > truncation)
        .map(|(_, c)| c * c)
        .sum();

    let full_g = CosineSeries::from_grid(g, &vec![limit; g.dim()])?;
    let additive_tail_sum = full_g
        .iter()
        .filter(|(idx, _)| idx.iter().copied().max().unwrap_or(0) > truncation)
        .map(|(_, c)| c * c)
        .sum();

    Ok(AssumptionDiagnostics {
        density_abs_sum,
        density_tail_sum,
        additive_tail_sum,
        truncation,
        resolution_limit: limit - 1,
    })
}
