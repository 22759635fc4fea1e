//! Integrated squared errors, asymptotic lower bounds and the ratio table
//! comparing estimators across a simulation cell.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SeriesEstimate;
use crate::function_space::{pinsker_constant, GridFunction};
use crate::sim_models::{coefficient_of_difficulty, ModelParts, RegressionModel};

/// Below this many replications ratio tables are marked noisy.
pub const NOISY_REPS: usize = 30;

/// `int_0^1 (fhat - f)^2` on the grid of `truth`.
pub fn ise(estimate: &SeriesEstimate, truth: &GridFunction) -> Result<f64> {
    if truth.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: truth.dim(),
        });
    }
    estimate.to_grid(truth.nodes())?.l2_distance_sq(truth)
}

/// `P(alpha, Q) (d / n)^{2 alpha / (2 alpha + 1)}`, an asymptotic benchmark
/// rather than a finite-sample guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundValue {
    pub alpha: f64,
    pub q: f64,
    pub n: usize,
    pub d: f64,
    pub value: f64,
}

pub fn lower_bound_for_difficulty(d: f64, alpha: f64, q: f64, n: usize) -> Result<LowerBoundValue> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "difficulty must be positive, got {d}"
        )));
    }
    let rate = 2.0 * alpha / (2.0 * alpha + 1.0);
    let value = pinsker_constant(alpha, q)? * (d / n as f64).powf(rate);
    Ok(LowerBoundValue {
        alpha,
        q,
        n,
        d,
        value,
    })
}

/// Lower bound with the model's own coefficient of difficulty. Discrete
/// models carry the scale implied by their mean, so the pivot is `f` itself.
pub fn lower_bound(
    model: &RegressionModel,
    alpha: f64,
    q: f64,
    n: usize,
) -> Result<LowerBoundValue> {
    lower_bound_for_difficulty(coefficient_of_difficulty(model)?.d, alpha, q, n)
}

/// Lower bound for a discrete-response model whose implied scale is taken
/// at the pivot `f0` in place of `f`.
pub fn lower_bound_at_pivot(
    model: &RegressionModel,
    pivot: &GridFunction,
    alpha: f64,
    q: f64,
    n: usize,
) -> Result<LowerBoundValue> {
    let pinned = RegressionModel::from_parts(ModelParts {
        name: format!("{}-pivot", model.name()),
        response: model.response(),
        error_law: model.error_law(),
        regression: pivot.clone(),
        additive: model.additive().clone(),
        scale: model.scale().clone(),
        density: model.density().clone(),
    })?;
    lower_bound(&pinned, alpha, q, n)
}

/// Per-replication ISE values of one estimator in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRecord {
    pub estimator: String,
    pub ise: Vec<f64>,
}

impl RiskRecord {
    pub fn new(estimator: impl Into<String>, ise: Vec<f64>) -> Result<Self> {
        if ise.is_empty() {
            return Err(Error::InvalidParameter(
                "a risk record needs at least one replication".into(),
            ));
        }
        if let Some(v) = ise.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid ISE value {v}")));
        }
        Ok(Self {
            estimator: estimator.into(),
            ise,
        })
    }

    pub fn reps(&self) -> usize {
        self.ise.len()
    }

    pub fn aise(&self) -> f64 {
        self.ise.iter().sum::<f64>() / self.reps() as f64
    }

    /// Monte Carlo standard error of the AISE; zero for one replication.
    pub fn se(&self) -> f64 {
        let r = self.reps();
        if r < 2 {
            return 0.0;
        }
        let mean = self.aise();
        let var = self.ise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
        (var / r as f64).sqrt()
    }
}

/// `AISE(a) / AISE(b)` with a delta-method standard error that accounts for
/// the pairing of replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub se: f64,
}

pub fn paired_ratio(num: &RiskRecord, den: &RiskRecord) -> Result<Ratio> {
    if num.reps() != den.reps() {
        return Err(Error::InvalidParameter(format!(
            "records {} and {} have {} and {} replications",
            num.estimator,
            den.estimator,
            num.reps(),
            den.reps()
        )));
    }
    let b = den.aise();
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "AISE of {} is zero",
            den.estimator
        )));
    }
    let value = num.aise() / b;
    let r = num.reps();
    let se = if r < 2 {
        0.0
    } else {
        let resid: Vec<f64> = num
            .ise
            .iter()
            .zip(&den.ise)
            .map(|(a, d)| a - value * d)
            .collect();
        let mean = resid.iter().sum::<f64>() / r as f64;
        let var = resid.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
        (var / r as f64).sqrt() / b
    };
    Ok(Ratio { value, se })
}

/// Record keys used by the ratio table.
pub mod keys {
    pub const DEALER: &str = "D";
    pub const DATA_DRIVEN: &str = "S";
    pub const BASELINE_N: &str = "En";
    pub const BASELINE_M: &str = "Em";

    /// Data-driven estimator on data with additive component `g_s`.
    pub fn data_driven_with(s: usize) -> String {
        format!("S_g{s}")
    }

    /// Dealer estimator on data with additive component `g_s`.
    pub fn dealer_with(s: usize) -> String {
        format!("D_g{s}")
    }
}

/// `R1 = S/D`, `R2 = En/S`, `R3 = Em/D` and `R_{3+s} = S_gs/D_gs`; ratios
/// whose records are absent are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub ratios: [Option<Ratio>; 6],
    pub reps: usize,
    pub noisy: bool,
}

impl RatioTable {
    pub fn get(&self, i: usize) -> Option<Ratio> {
        self.ratios[i - 1]
    }
}

pub fn ratio_table(records: &BTreeMap<String, RiskRecord>) -> Result<RatioTable> {
    let need = |k: &str| {
        records
            .get(k)
            .ok_or_else(|| Error::MissingRecord(k.to_string()))
    };
    let d = need(keys::DEALER)?;
    let s = need(keys::DATA_DRIVEN)?;
    let mut ratios = [None; 6];
    ratios[0] = Some(paired_ratio(s, d)?);
    if let Some(en) = records.get(keys::BASELINE_N) {
        ratios[1] = Some(paired_ratio(en, s)?);
    }
    if let Some(em) = records.get(keys::BASELINE_M) {
        ratios[2] = Some(paired_ratio(em, d)?);
    }
    for g in 1..=3 {
        if let Some(sg) = records.get(&keys::data_driven_with(g)) {
            let dg = records.get(&keys::dealer_with(g)).unwrap_or(d);
            ratios[2 + g] = Some(paired_ratio(sg, dg)?);
        }
    }
    let reps = d.reps();
    Ok(RatioTable {
        ratios,
        reps,
        noisy: reps < NOISY_REPS,
    })
}

/// Records and ratios of one scenario and sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCell {
    pub scenario: String,
    pub n: usize,
    /// Size of the extended sample used by `Em`.
    pub m: usize,
    pub records: BTreeMap<String, RiskRecord>,
    pub ratios: Option<RatioTable>,
    pub guard_events: usize,
}

pub const RISK_CSV_HEADER: [&str; 11] = [
    "scenario",
    "n",
    "estimator",
    "aise",
    "se",
    "R1",
    "R2",
    "R3",
    "R4",
    "R5",
    "R6",
];

/// One row per estimator and cell; ratio columns repeat the cell's ratios
/// and are empty when unavailable.
pub fn write_risk_csv<W: Write>(cells: &[RiskCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RISK_CSV_HEADER)?;
    for cell in cells {
        let ratios: Vec<String> = (1..=6)
            .map(|i| {
                cell.ratios
                    .as_ref()
                    .and_then(|t| t.get(i))
                    .map_or_else(String::new, |r| r.value.to_string())
            })
            .collect();
        for (name, rec) in &cell.records {
            let mut row = vec![
                cell.scenario.clone(),
                cell.n.to_string(),
                name.clone(),
                rec.aise().to_string(),
                rec.se().to_string(),
            ];
            row.extend(ratios.iter().cloned());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Table in the layout of the published study: per scenario an `m` row, an
/// `R1,R2,R3` row and an `R4,R5,R6` row, with one column per sample size.
pub fn format_ratio_table(cells: &[RiskCell]) -> String {
    let mut scenarios: Vec<&str> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for c in cells {
        if !scenarios.contains(&c.scenario.as_str()) {
            scenarios.push(&c.scenario);
        }
        if !sizes.contains(&c.n) {
            sizes.push(c.n);
        }
    }
    sizes.sort_unstable();
    let find = |s: &str, n: usize| cells.iter().find(|c| c.scenario == s && c.n == n);
    let triple = |c: &RiskCell, from: usize| -> String {
        let t = match &c.ratios {
            Some(t) => t,
            None => return "-".into(),
        };
        let parts: Vec<String> = (from..from + 3)
            .map(|i| {
                t.get(i)
                    .map_or_else(|| "-".into(), |r| format!("{:.2}", r.value))
            })
            .collect();
        let mut s = parts.join(",");
        if t.noisy {
            s.push('*');
        }
        s
    };
    let mut out = String::new();
    out.push_str(&format!("{:<16}{:<10}", "scenario", ""));
    for n in &sizes {
        out.push_str(&format!("{:>18}", format!("n={n}")));
    }
    out.push('\n');
    for s in &scenarios {
        let rows: [(&str, Box<dyn Fn(&RiskCell) -> String>); 3] = [
            ("m", Box::new(|c: &RiskCell| c.m.to_string())),
            ("R1,R2,R3", Box::new(|c: &RiskCell| triple(c, 1))),
            ("R4,R5,R6", Box::new(|c: &RiskCell| triple(c, 4))),
        ];
        for (i, (label, f)) in rows.iter().enumerate() {
            let name = if i == 0 { *s } else { "" };
            out.push_str(&format!("{name:<16}{label:<10}"));
            for &n in &sizes {
                let v = find(s, n).map_or_else(|| "-".into(), f);
                out.push_str(&format!("{v:>18}"));
            }
            out.push('\n');
        }
    }
    if cells
        .iter()
        .any(|c| c.ratios.as_ref().is_some_and(|t| t.noisy))
    {
        out.push_str(&format!("* fewer than {NOISY_REPS} replications\n"));
    }
    out
}
