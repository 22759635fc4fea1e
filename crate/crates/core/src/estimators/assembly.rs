//! Blockwise shrinkage of estimated Fourier coefficients.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::block_scheme::BlockScheme;
use crate::error::{Error, Result};
use crate::function_space::{node, phi, GridFunction};
use crate::sim_models::ResponseKind;

/// Default points of an exported curve.
pub const CURVE_POINTS: usize = 201;

/// Default margin of the bona fide clamp.
pub const BONA_FIDE_DELTA: f64 = 1e-3;

/// A finite cosine sum `sum_k mu_k sum_{j in B_k} theta_j phi_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEstimate {
    pub estimator: String,
    pub scheme: BlockScheme,
    /// Unshrunk coefficient estimates, one per frequency in the blocks.
    pub raw_coefficients: Vec<f64>,
    /// Block energy estimates.
    pub block_energy: Vec<f64>,
    /// Shrinkage weights in `[0, 1]`, one per block.
    pub weights: Vec<f64>,
    /// Shrunk coefficients.
    pub coefficients: Vec<f64>,
    /// Coefficient of difficulty used for shrinkage.
    pub difficulty: f64,
    /// Number of denominators raised to the guard floor.
    pub guard_events: usize,
}

impl SeriesEstimate {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| c * phi(j, x))
            .sum()
    }

    /// Values on the midpoint grid with `nodes` nodes.
    pub fn to_grid(&self, nodes: usize) -> Result<GridFunction> {
        GridFunction::from_values(
            1,
            nodes,
            (0..nodes).map(|i| self.eval(node(i, nodes))).collect(),
        )
    }

    /// `points` equally spaced evaluations on `[0, 1]`, endpoints included.
    pub fn curve(&self, points: usize) -> Vec<(f64, f64)> {
        let last = points.saturating_sub(1).max(1) as f64;
        (0..points)
            .map(|i| {
                let x = i as f64 / last;
                (x, self.eval(x))
            })
            .collect()
    }

    pub fn write_curve_csv<W: Write>(&self, out: W, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "fhat"])?;
        for (x, v) in self.curve(points) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `energy / (energy + d / n)`, zero unless `energy` exceeds `threshold`.
pub fn shrinkage_weight(energy: f64, d: f64, n: usize, threshold: f64) -> f64 {
    if energy > threshold {
        energy / (energy + d / n as f64)
    } else {
        0.0
    }
}

fn check_lengths(scheme: &BlockScheme, coefs: usize, blocks: usize) -> Result<()> {
    if coefs != scheme.coefficient_count() {
        return Err(Error::DimensionMismatch {
            expected: scheme.coefficient_count(),
            got: coefs,
        });
    }
    if blocks != scheme.block_count() {
        return Err(Error::DimensionMismatch {
            expected: scheme.block_count(),
            got: blocks,
        });
    }
    Ok(())
}

fn shrink(raw: &[f64], weights: &[f64], scheme: &BlockScheme) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    for (k, &w) in weights.iter().enumerate() {
        for j in scheme.block(k) {
            out[j] = w * raw[j];
        }
    }
    out
}

/// Data-driven assembly: block `k` is kept when its energy estimate exceeds
/// `1 / (b_n n)`.
pub fn assemble_estimate(
    estimator: &str,
    raw: Vec<f64>,
    energy: Vec<f64>,
    d_hat: f64,
    scheme: &BlockScheme,
) -> Result<SeriesEstimate> {
    check_lengths(scheme, raw.len(), energy.len())?;
    if !(d_hat > 0.0) || !d_hat.is_finite() {
        return Err(Error::Guard(format!(
            "coefficient of difficulty estimate {d_hat}"
        )));
    }
    if raw.iter().chain(&energy).any(|v| !v.is_finite()) {
        return Err(Error::Guard("non-finite coefficient estimate".into()));
    }
    let threshold = 1.0 / (scheme.b_n * scheme.n) as f64;
    let weights: Vec<f64> = energy
        .iter()
        .map(|&e| shrinkage_weight(e, d_hat, scheme.n, threshold))
        .collect();
    let coefficients = shrink(&raw, &weights, scheme);
    Ok(SeriesEstimate {
        estimator: estimator.to_string(),
        scheme: scheme.clone(),
        raw_coefficients: raw,
        block_energy: energy,
        weights,
        coefficients,
        difficulty: d_hat,
        guard_events: 0,
    })
}

/// Mean squared coefficient over each block.
pub fn block_energies(theta: &[f64], scheme: &BlockScheme) -> Vec<f64> {
    (0..scheme.block_count())
        .map(|k| {
            let r = scheme.block(k);
            let len = r.len() as f64;
            r.map(|j| theta[j] * theta[j]).sum::<f64>() / len
        })
        .collect()
}

/// Shrinkage weights computed from true coefficients, without threshold.
pub fn oracle_weights(theta: &[f64], d: f64, scheme: &BlockScheme) -> Result<Vec<f64>> {
    if theta.len() < scheme.coefficient_count() {
        return Err(Error::DimensionMismatch {
            expected: scheme.coefficient_count(),
            got: theta.len(),
        });
    }
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coefficient of difficulty {d} must be positive"
        )));
    }
    Ok(block_energies(theta, scheme)
        .into_iter()
        .map(|e| e / (e + d / scheme.n as f64))
        .collect())
}

/// Oracle shrinkage of the true coefficients.
pub fn oracle_estimate(theta: &[f64], d: f64, scheme: &BlockScheme) -> Result<SeriesEstimate> {
    apply_oracle(
        theta[..scheme.coefficient_count().min(theta.len())].to_vec(),
        theta,
        d,
        scheme,
    )
}

/// Oracle weights from the true coefficients applied to estimates `raw`.
pub fn apply_oracle(
    raw: Vec<f64>,
    theta: &[f64],
    d: f64,
    scheme: &BlockScheme,
) -> Result<SeriesEstimate> {
    let weights = oracle_weights(theta, d, scheme)?;
    check_lengths(scheme, raw.len(), weights.len())?;
    let energy = block_energies(theta, scheme);
    let coefficients = shrink(&raw, &weights, scheme);
    Ok(SeriesEstimate {
        estimator: "oracle".into(),
        scheme: scheme.clone(),
        raw_coefficients: raw,
        block_energy: energy,
        weights,
        coefficients,
        difficulty: d,
        guard_events: 0,
    })
}

/// Clamps a difficulty estimate into `[(c2 b_n)^{-1/4}, (c2 b_n)^{1/4}]`.
pub fn d_hat_projection(d: f64, scheme: &BlockScheme, c2: f64) -> f64 {
    let edge = (c2 * scheme.b_n as f64).powf(0.25);
    d.clamp(1.0 / edge, edge)
}

/// Evaluated estimate restricted to the admissible range of the response
/// kind: `[delta, 1 - delta]` for Bernoulli, `[delta, inf)` for Poisson.
pub fn bona_fide_clamp(
    estimate: &SeriesEstimate,
    kind: ResponseKind,
    delta: f64,
    nodes: usize,
) -> Result<GridFunction> {
    let grid = estimate.to_grid(nodes)?;
    match kind {
        ResponseKind::Continuous => Ok(grid),
        ResponseKind::Bernoulli => grid.map(|v| v.clamp(delta, 1.0 - delta)),
        ResponseKind::Poisson => grid.map(|v| v.max(delta)),
    }
}
