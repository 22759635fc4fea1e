//! Experiment orchestration behind the command-line front end: dataset
//! simulation, single fits, the replicated ratio table and bound tables.

pub mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{default_variance_bounds, with_additive, ExperimentConfig, MIN_SPLIT_N};

use crate::block_scheme::build_scheme;
use crate::error::{Error, Result};
use crate::estimators::{
    fit, oracle_estimate, EstimatorOptions, EstimatorTag, Nuisance, SeriesEstimate,
    BONA_FIDE_DELTA, CURVE_POINTS,
};
use crate::function_space::GridFunction;
use crate::risk_eval::{
    format_ratio_table, ise, keys, lower_bound, lower_bound_at_pivot, ratio_table, write_risk_csv,
    LowerBoundValue, RiskCell, RiskRecord,
};
use crate::sim_models::{
    builtin_spec, coefficient_of_difficulty, inflate, sample_dataset, sample_dataset_stream,
    Difficulty, RegressionModel, ResponseKind, SampledDataset, ScenarioSpec,
};

/// Environment variable holding the log filter.
pub const LOG_ENV: &str = "BLOCKSHRINK_LOG";

pub fn build_model(spec: &ScenarioSpec, config: &ExperimentConfig) -> Result<RegressionModel> {
    RegressionModel::from_spec(spec, config.resolution)
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Writes one dataset per scenario, additive component and sample size,
/// drawn from stream 0 of the master seed. Returns the written paths.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    ensure_dir(&config.out)?;
    let components = config.additive_components()?;
    let mut paths = Vec::new();
    for base in config.scenarios()? {
        let specs = if components.is_empty() {
            vec![base.clone()]
        } else {
            components
                .iter()
                .map(|&g| with_additive(&base, g))
                .collect()
        };
        for spec in specs {
            let model = build_model(&spec, config)?;
            for &n in &config.n {
                let data = sample_dataset(&model, n, config.seed)?;
                let path = config.out.join(format!("{}-n{n}.csv", spec.name));
                data.save(&path)?;
                info!("wrote {}", path.display());
                paths.push(path);
            }
        }
    }
    Ok(paths)
}

/// True coefficients and difficulty for a dataset-free oracle fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleInput {
    pub theta: Vec<f64>,
    pub d: f64,
    pub n: usize,
}

/// What `cmd_fit` estimates from.
pub enum FitInput<'a> {
    Dataset(&'a Path),
    Oracle(&'a Path),
}

/// Paths written by `cmd_fit`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub estimate: PathBuf,
    pub curve: PathBuf,
}

fn scenario_for_fit(
    data: &SampledDataset,
    config: &ExperimentConfig,
) -> Result<Option<ScenarioSpec>> {
    if let Some(spec) = config.scenarios_if_named()? {
        return Ok(Some(spec));
    }
    match data.provenance() {
        Some(p) => Ok(builtin_spec(&p.model).ok()),
        None => Ok(None),
    }
}

/// `points` samples of the estimate on `[0, 1]`, clamped to the admissible
/// range of discrete responses.
pub fn curve_points(est: &SeriesEstimate, kind: ResponseKind, points: usize) -> Vec<(f64, f64)> {
    est.curve(points)
        .into_iter()
        .map(|(x, v)| {
            let v = match kind {
                ResponseKind::Continuous => v,
                ResponseKind::Bernoulli => v.clamp(BONA_FIDE_DELTA, 1.0 - BONA_FIDE_DELTA),
                ResponseKind::Poisson => v.max(BONA_FIDE_DELTA),
            };
            (x, v)
        })
        .collect()
}

pub fn write_curve<W: Write>(curve: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "fhat"])?;
    for (x, v) in curve {
        w.write_record([x.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Fits `tag` and writes the estimate JSON and its 201-point curve CSV.
pub fn cmd_fit(
    input: FitInput<'_>,
    tag: EstimatorTag,
    config: &ExperimentConfig,
) -> Result<FitOutput> {
    let (est, stem, kind) = match input {
        FitInput::Oracle(path) => {
            let text = fs::read_to_string(path)?;
            let oracle: OracleInput = serde_json::from_str(&text)?;
            let scheme = build_scheme(oracle.n, 1)?;
            let mut theta = oracle.theta;
            theta.resize(theta.len().max(scheme.coefficient_count()), 0.0);
            let est = oracle_estimate(&theta, oracle.d, &scheme)?;
            (est, file_stem(path), ResponseKind::Continuous)
        }
        FitInput::Dataset(path) => {
            let data = SampledDataset::load(path)?;
            let spec = scenario_for_fit(&data, config)?;
            let model = spec.as_ref().map(|s| build_model(s, config)).transpose()?;
            if tag.needs_model() && model.is_none() {
                return Err(Error::Config(format!(
                    "estimator {tag} needs a scenario; pass one or fit a simulated dataset"
                )));
            }
            let opts = match &model {
                Some(m) => config.options_for(m),
                None => config.estimator.clone(),
            };
            let nuisance = match &model {
                Some(m) => Nuisance::known(m, coefficient_of_difficulty(m)?),
                None => Nuisance::none(),
            };
            let est = fit(tag, &data, nuisance, &opts)?;
            if est.guard_events > 0 {
                log::warn!(
                    "{} denominators raised to the guard floor",
                    est.guard_events
                );
            }
            let kind = model
                .as_ref()
                .map_or(ResponseKind::Continuous, |m| m.response());
            (est, file_stem(path), kind)
        }
    };
    ensure_dir(&config.out)?;
    let estimate = config.out.join(format!("{stem}-{tag}.json"));
    let curve = config.out.join(format!("{stem}-{tag}-curve.csv"));
    fs::write(&estimate, est.to_json()? + "\n")?;
    write_curve(
        &curve_points(&est, kind, CURVE_POINTS),
        fs::File::create(&curve)?,
    )?;
    Ok(FitOutput { estimate, curve })
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "estimate".into())
}

impl ExperimentConfig {
    /// The single configured scenario when one was named explicitly.
    fn scenarios_if_named(&self) -> Result<Option<ScenarioSpec>> {
        if self.scenario.is_empty() && self.model.is_empty() {
            return Ok(None);
        }
        let all = self.scenarios()?;
        if all.len() > 1 {
            return Err(Error::Config("fitting takes a single scenario".into()));
        }
        Ok(all.into_iter().next())
    }
}

/// Everything a ratio-table run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub cells: Vec<RiskCell>,
    pub guard_events: usize,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn risk_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_risk_csv(&self.cells, &mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn table_text(&self) -> String {
        format_ratio_table(&self.cells)
    }
}

/// One fitted estimator of a replication.
struct Job {
    key: String,
    tag: EstimatorTag,
    /// 0 for the base data, `s` for the data with component `g_s`.
    data: usize,
    extended: bool,
}

/// A generating model with what the estimators read from it.
struct CellModel {
    /// 0 for the scenario's own component, `s` for `g_s`.
    component: usize,
    model: RegressionModel,
    difficulty: Difficulty,
    opts: EstimatorOptions,
}

impl CellModel {
    fn new(component: usize, model: RegressionModel, config: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            component,
            difficulty: coefficient_of_difficulty(&model)?,
            opts: config.options_for(&model),
            model,
        })
    }
}

struct CellPlan {
    spec: ScenarioSpec,
    models: Vec<CellModel>,
    n: usize,
    m: usize,
    jobs: Vec<Job>,
}

fn plan_cell(spec: &ScenarioSpec, n: usize, config: &ExperimentConfig) -> Result<CellPlan> {
    let base = CellModel::new(0, build_model(spec, config)?, config)?;
    let m = inflate(n, &base.difficulty).max(n);
    let mut jobs = vec![
        Job {
            key: keys::DEALER.into(),
            tag: EstimatorTag::D,
            data: 0,
            extended: false,
        },
        Job {
            key: keys::DATA_DRIVEN.into(),
            tag: EstimatorTag::S,
            data: 0,
            extended: false,
        },
        Job {
            key: keys::BASELINE_N.into(),
            tag: EstimatorTag::E,
            data: 0,
            extended: false,
        },
        Job {
            key: keys::BASELINE_M.into(),
            tag: EstimatorTag::E,
            data: 0,
            extended: true,
        },
    ];
    for &tag in &config.extra_estimators {
        if !jobs.iter().any(|j| j.key == tag.name()) {
            jobs.push(Job {
                key: tag.name().into(),
                tag,
                data: 0,
                extended: false,
            });
        }
    }
    let mut models = vec![base];
    for g in config.additive_components()? {
        let s = g.index();
        if s == 0 || models.iter().any(|c| c.component == s) {
            continue;
        }
        models.push(CellModel::new(
            s,
            build_model(&with_additive(spec, g), config)?,
            config,
        )?);
        jobs.push(Job {
            key: keys::data_driven_with(s),
            tag: EstimatorTag::S,
            data: s,
            extended: false,
        });
        jobs.push(Job {
            key: keys::dealer_with(s),
            tag: EstimatorTag::D,
            data: s,
            extended: false,
        });
    }
    Ok(CellPlan {
        spec: spec.clone(),
        models,
        n,
        m,
        jobs,
    })
}

/// ISE of every job in replication `rep`, with the guard events.
fn run_replication(
    plan: &CellPlan,
    config: &ExperimentConfig,
    rep: u64,
) -> Result<(Vec<f64>, usize)> {
    let mut samples = Vec::with_capacity(plan.models.len());
    for cm in &plan.models {
        let size = if cm.component == 0 { plan.m } else { plan.n };
        let big = sample_dataset_stream(&cm.model, size, config.seed, rep)?;
        let small = big.prefix(plan.n)?;
        samples.push((cm, big, small));
    }
    let mut out = Vec::with_capacity(plan.jobs.len());
    let mut guard = 0;
    for job in &plan.jobs {
        let (cm, big, small) = samples
            .iter()
            .find(|(cm, ..)| cm.component == job.data)
            .expect("planned component");
        let data = if job.extended { big } else { small };
        let nuisance = Nuisance::known(&cm.model, cm.difficulty);
        let est = fit(job.tag, data, nuisance, &cm.opts)?;
        guard += est.guard_events;
        out.push(ise(&est, cm.model.regression())?);
    }
    Ok((out, guard))
}

fn run_cell(plan: &CellPlan, config: &ExperimentConfig) -> Result<RiskCell> {
    let reps: Vec<(Vec<f64>, usize)> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| run_replication(plan, config, r))
        .collect::<Result<_>>()?;
    let mut records = BTreeMap::new();
    for (i, job) in plan.jobs.iter().enumerate() {
        let values = reps.iter().map(|(v, _)| v[i]).collect();
        records.insert(job.key.clone(), RiskRecord::new(job.key.clone(), values)?);
    }
    let guard_events = reps.iter().map(|(_, g)| g).sum();
    let ratios = Some(ratio_table(&records)?);
    Ok(RiskCell {
        scenario: plan.spec.name.clone(),
        n: plan.n,
        m: plan.m,
        records,
        ratios,
        guard_events,
    })
}

/// Runs every scenario and sample size with paired replications and
/// returns the report without writing it.
pub fn run_table1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let pool = thread_pool(config.workers)?;
    let mut cells = Vec::new();
    for spec in config.scenarios()? {
        for &n in &config.n {
            let plan = plan_cell(&spec, n, config)?;
            info!("cell {} n={n} m={} reps={}", spec.name, plan.m, config.reps);
            cells.push(pool.install(|| run_cell(&plan, config))?);
        }
    }
    let guard_events = cells.iter().map(|c| c.guard_events).sum();
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        cells,
        guard_events,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the ratio table and writes `table1.csv`, `table1.json` and
/// `table1.txt` under the output directory.
pub fn cmd_table1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = run_table1(config)?;
    ensure_dir(&config.out)?;
    fs::write(config.out.join("table1.csv"), report.risk_csv()?)?;
    fs::write(
        config.out.join("table1.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    fs::write(config.out.join("table1.txt"), report.table_text())?;
    Ok(report)
}

/// One row of a bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub scenario: String,
    #[serde(flatten)]
    pub bound: LowerBoundValue,
}

/// Asymptotic lower bounds for every configured scenario and sample size.
pub fn bound_rows(config: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for spec in config.scenarios()? {
        let model = build_model(&spec, config)?;
        for &n in &config.n {
            let bound = match (config.pivot, model.response()) {
                (Some(c), ResponseKind::Bernoulli | ResponseKind::Poisson) => {
                    let pivot = GridFunction::constant(1, model.regression().nodes(), c)?;
                    lower_bound_at_pivot(&model, &pivot, config.alpha, config.q, n)?
                }
                _ => lower_bound(&model, config.alpha, config.q, n)?,
            };
            rows.push(BoundRow {
                scenario: spec.name.clone(),
                bound,
            });
        }
    }
    Ok(rows)
}

pub fn write_bounds_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "alpha", "q", "n", "d", "bound"])?;
    for r in rows {
        let b = &r.bound;
        w.write_record([
            r.scenario.clone(),
            b.alpha.to_string(),
            b.q.to_string(),
            b.n.to_string(),
            b.d.to_string(),
            b.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `bounds.csv` under the output directory.
pub fn cmd_bounds(config: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let rows = bound_rows(config)?;
    ensure_dir(&config.out)?;
    write_bounds_csv(&rows, fs::File::create(config.out.join("bounds.csv"))?)?;
    Ok(rows)
}
