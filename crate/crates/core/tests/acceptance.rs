//! End-to-end acceptance checks, one line per check. Runs without the test
//! harness so the lines always reach stdout.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use blockshrink::block_scheme::build_scheme;
use blockshrink::estimators::{
    big_theta_hat, fit, true_coefficients, EstimatorOptions, EstimatorTag, Nuisance,
};
use blockshrink::function_space::{
    family_membership, fejer_approximation, phi, FunctionFamilySpec, GridFunction,
};
use blockshrink::harness::{run_table1, ExperimentConfig};
use blockshrink::risk_eval::ise;
use blockshrink::sim_models::{
    bernoulli_scenario, coefficient_of_difficulty, exponential_scenario, inflated_sample_size,
    poisson_scenario, sample_dataset, sample_dataset_stream, AdditiveSpec, ModelResolution,
    RegressionModel, RegressionSpec, ResponseKind, ScaleSpec, ScenarioSpec,
};

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn model(spec: &ScenarioSpec) -> RegressionModel {
    RegressionModel::from_spec(spec, ModelResolution::default()).unwrap()
}

fn cosine_scenario(name: &str, coefficients: Vec<f64>, scale: ScaleSpec) -> ScenarioSpec {
    let mut s = exponential_scenario(1.0, AdditiveSpec::Zero);
    s.name = name.into();
    s.regression = RegressionSpec::Cosine { coefficients };
    s.scale = scale;
    s
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn inflated_sizes() -> Outcome {
    let start = Instant::now();
    let published = [
        [54, 108, 216, 432],
        [69, 138, 276, 552],
        [100, 201, 403, 806],
    ];
    let (mut exact, mut within) = (0, 0);
    for (row, lambda) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let m = model(&exponential_scenario(lambda, AdditiveSpec::Zero));
        for (col, n) in [50, 100, 200, 400].into_iter().enumerate() {
            let got = inflated_sample_size(n, &m).unwrap();
            exact += usize::from(got == published[row][col]);
            within += usize::from(got.abs_diff(published[row][col]) <= 2);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        within == 12 && exact >= 10 && secs < 1.0,
        format!("{within}/12 within 2, {exact}/12 exact, {secs:.3}s"),
    )
}

fn ratio_trends() -> Outcome {
    let cfg = ExperimentConfig {
        lambda: vec![1.0, 2.0, 3.0],
        n: vec![100, 200, 400],
        reps: 200,
        seed: SEED,
        ..Default::default()
    };
    let report = run_table1(&cfg).unwrap();
    let mut fails = Vec::new();
    let ratio = |scenario: &str, n: usize, i: usize| {
        report
            .cells
            .iter()
            .find(|c| c.scenario == scenario && c.n == n)
            .and_then(|c| c.ratios.as_ref())
            .and_then(|t| t.get(i))
            .unwrap()
            .value
    };
    let mut r2_at_200 = Vec::new();
    for lambda in [1, 2, 3] {
        let s = format!("lambda{lambda}-g0");
        for n in [100, 200, 400] {
            let (r1, r2, r3) = (ratio(&s, n, 1), ratio(&s, n, 2), ratio(&s, n, 3));
            if lambda >= 2 && r2 <= 1.0 {
                fails.push(format!("R2={r2:.3} at {s} n={n}"));
            }
            if !(0.9..=1.3).contains(&r1) {
                fails.push(format!("R1={r1:.3} at {s} n={n}"));
            }
            if !(0.7..=1.3).contains(&r3) {
                fails.push(format!("R3={r3:.3} at {s} n={n}"));
            }
            if n == 200 {
                r2_at_200.push(r2);
            }
        }
    }
    if !r2_at_200.windows(2).all(|w| w[1] > w[0]) {
        fails.push(format!("R2 at n=200 not increasing: {r2_at_200:.3?}"));
    }
    let detail = if fails.is_empty() {
        let mut all: Vec<f64> = Vec::new();
        for i in 1..=3 {
            for c in &report.cells {
                all.push(c.ratios.as_ref().unwrap().get(i).unwrap().value);
            }
        }
        format!(
            "9 cells, R=200; R1 in [{:.3}, {:.3}], R3 in [{:.3}, {:.3}], R2 at n=200 {r2_at_200:.3?}",
            all[0..9].iter().cloned().fold(f64::INFINITY, f64::min),
            all[0..9].iter().cloned().fold(0.0, f64::max),
            all[18..27].iter().cloned().fold(f64::INFINITY, f64::min),
            all[18..27].iter().cloned().fold(0.0, f64::max),
        )
    } else {
        fails.join("; ")
    };
    outcome(fails.is_empty(), detail)
}

fn nuisance_robustness() -> Outcome {
    let cfg = ExperimentConfig {
        lambda: vec![1.0],
        n: vec![400],
        g: vec![1, 2, 3],
        reps: 200,
        seed: SEED,
        ..Default::default()
    };
    let report = run_table1(&cfg).unwrap();
    let t = report.cells[0].ratios.as_ref().unwrap();
    let values: Vec<f64> = (4..=6).map(|i| t.get(i).unwrap().value).collect();
    outcome(
        values.iter().all(|v| (0.95..=1.25).contains(v)),
        format!("R4..R6 = {values:.3?}"),
    )
}

fn energy_unbiasedness() -> Outcome {
    let reps = 500u64;
    let m = 200;
    let single = model(&cosine_scenario(
        "phi1",
        vec![0.0, 1.0],
        ScaleSpec::Constant { value: 1.0 },
    ));
    let bell = model(&exponential_scenario(1.0, AdditiveSpec::Zero));
    let scheme = build_scheme(m, 1).unwrap();
    let mut cases: Vec<(&RegressionModel, std::ops::Range<usize>)> =
        vec![(&single, 1..2), (&single, 2..4), (&single, 0..1)];
    for k in 0..3 {
        cases.push((&bell, scheme.block(k)));
    }
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (i, (mdl, block)) in cases.iter().enumerate() {
        let theta = true_coefficients(mdl, block.end).unwrap();
        let truth = block.clone().map(|j| theta[j] * theta[j]).sum::<f64>() / block.len() as f64;
        let draws: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let d = sample_dataset_stream(mdl, m, SEED + 100 + i as u64, r).unwrap();
                let weighted: Vec<f64> = (0..m)
                    .map(|l| d.y()[l] / mdl.density_at(d.x()[l], d.z(l)))
                    .collect();
                big_theta_hat(d.x(), &weighted, block.clone()).unwrap()
            })
            .collect();
        let (mean, se) = mean_se(&draws);
        let z = (mean - truth).abs() / se;
        worst = worst.max(z);
        pass &= z <= 4.0;
    }
    outcome(
        pass,
        format!("6 cases, m=200, R=500; largest |mean - truth| = {worst:.2} s.e."),
    )
}

fn fejer_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_range: f64 = 0.0;
    for i in 0..100 {
        let (dim, nodes) = if i % 2 == 0 { (1, 512) } else { (2, 64) };
        let order = 2 + i % 7;
        let values: Vec<f64> = (0..nodes * if dim == 1 { 1 } else { nodes })
            .map(|_| rng.random_range(0.05..5.0))
            .collect();
        let f = GridFunction::from_values(dim, nodes, values).unwrap();
        let a = fejer_approximation(&f, order).unwrap();
        worst_range = worst_range.max(f.min() - a.min()).max(a.max() - f.max());
    }
    let c = fejer_approximation(&GridFunction::constant(2, 64, 4.0).unwrap(), 5).unwrap();
    let fixed = c
        .values()
        .iter()
        .map(|v| (v - 4.0).abs())
        .fold(0.0, f64::max);
    let f = GridFunction::from_fn(2, 64, |p| (3.0 * p[0]).sin() + p[1] * p[1]).unwrap();
    let g = GridFunction::from_fn(2, 64, |p| (p[0] * p[1]).exp()).unwrap();
    let (a, b) = (1.7, -0.3);
    let lhs = fejer_approximation(&f.linear_combination(a, &g, b).unwrap(), 6).unwrap();
    let rhs = fejer_approximation(&f, 6)
        .unwrap()
        .linear_combination(a, &fejer_approximation(&g, 6).unwrap(), b)
        .unwrap();
    let linear = lhs
        .values()
        .iter()
        .zip(rhs.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    outcome(
        worst_range <= 1e-6 && fixed <= 1e-8 && linear <= 1e-10,
        format!("range excess {worst_range:.1e}, constant error {fixed:.1e}, linearity error {linear:.1e}"),
    )
}

fn orthonormality() -> Outcome {
    let nodes = 512;
    let mut worst: f64 = 0.0;
    for j in 0..=20 {
        for k in 0..=20 {
            let g = GridFunction::from_fn(1, nodes, |p| phi(j, p[0]) * phi(k, p[0])).unwrap();
            worst = worst.max((g.integral() - if j == k { 1.0 } else { 0.0 }).abs());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max |Gram - I| = {worst:.1e} at 512 nodes"),
    )
}

fn variance_targeting() -> Outcome {
    let mdl = model(&cosine_scenario(
        "phi1-lambda1",
        vec![0.0, 1.0],
        ScaleSpec::Exponential { lambda: 1.0 },
    ));
    let diff = coefficient_of_difficulty(&mdl).unwrap();
    let n = 4000;
    let j = 5;
    let opts = EstimatorOptions::default();
    let draws: Vec<f64> = (0..400u64)
        .into_par_iter()
        .map(|r| {
            let d = sample_dataset_stream(&mdl, n, SEED + 7, r).unwrap();
            fit(EstimatorTag::D, &d, Nuisance::known(&mdl, diff), &opts)
                .unwrap()
                .raw_coefficients[j]
        })
        .collect();
    let (_, se) = mean_se(&draws);
    let scaled = se * se * 400.0 * n as f64;
    let rel = (scaled - diff.d).abs() / diff.d;
    outcome(
        rel <= 0.25 && (diff.d - 1.58198).abs() < 1e-4,
        format!(
            "n Var(theta_5) = {scaled:.4}, d = {:.5}, relative gap {rel:.3}",
            diff.d
        ),
    )
}

fn oracle_rate() -> Outcome {
    let mut coefs = vec![0.4];
    coefs.extend((1..=40).map(|j| 0.2 / (j * j) as f64));
    let spec = cosine_scenario("sobolev-test", coefs, ScaleSpec::Constant { value: 1.0 });
    let mdl = model(&spec);
    let class = FunctionFamilySpec::sobolev(mdl.regression().nodes(), 1.0, 1.0).unwrap();
    let member = family_membership(mdl.regression(), &class, 200, 1e-8)
        .unwrap()
        .is_member();
    let diff = coefficient_of_difficulty(&mdl).unwrap();
    let opts = EstimatorOptions::default();
    let mise = |n: usize| {
        let v: Vec<f64> = (0..300u64)
            .into_par_iter()
            .map(|r| {
                let d = sample_dataset_stream(&mdl, n, SEED + 8, r).unwrap();
                let est =
                    fit(EstimatorTag::Oracle, &d, Nuisance::known(&mdl, diff), &opts).unwrap();
                ise(&est, mdl.regression()).unwrap()
            })
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (a, b) = (mise(400), mise(1600));
    let factor = a / b;
    outcome(
        member && (1.8..=3.6).contains(&factor),
        format!(
            "MISE {a:.5} at n=400, {b:.5} at n=1600, factor {factor:.3}, class member {member}"
        ),
    )
}

fn discrete_variances() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for spec in [bernoulli_scenario(), poisson_scenario()] {
        let mdl = model(&spec);
        let d = sample_dataset(&mdl, 1_000_000, SEED + 9).unwrap();
        let bins = 20;
        let mut groups: Vec<Vec<f64>> = vec![Vec::new(); bins];
        for l in 0..d.len() {
            let (x, z, y) = (d.x()[l], d.z(l), d.y()[l]);
            let q = mdl.mean_at(x, z);
            let implied = match spec.response {
                ResponseKind::Bernoulli => q * (1.0 - q),
                _ => q,
            };
            let b = ((x * bins as f64) as usize).min(bins - 1);
            groups[b].push((y - q).powi(2) - implied);
        }
        for g in &groups {
            let (mean, se) = mean_se(g);
            let z = mean.abs() / se;
            worst = worst.max(z);
            pass &= z <= 4.0;
        }
    }
    outcome(
        pass,
        format!("20 bins x 2 laws at 1e6 draws; largest gap {worst:.2} s.e."),
    )
}

fn determinism() -> Outcome {
    let base = ExperimentConfig {
        lambda: vec![2.0],
        n: vec![100],
        g: vec![1],
        extra_estimators: vec![EstimatorTag::S3],
        reps: 40,
        seed: SEED,
        ..Default::default()
    };
    let run = |workers: usize| {
        let cfg = ExperimentConfig {
            workers,
            ..base.clone()
        };
        let r = run_table1(&cfg).unwrap();
        (r.risk_csv().unwrap(), r.table_text())
    };
    let one = run(1);
    let four = run(4);
    let again = run(1);
    outcome(
        one == four && one == again,
        format!(
            "{} CSV bytes identical across 1, 4 and 1 workers",
            one.0.len()
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("inflated sample sizes", inflated_sizes),
        ("ratio trends at desk scale", ratio_trends),
        ("nuisance-component robustness", nuisance_robustness),
        ("block energy unbiasedness", energy_unbiasedness),
        ("Fejer properties", fejer_properties),
        ("orthonormality", orthonormality),
        ("variance targeting", variance_targeting),
        ("oracle rate", oracle_rate),
        ("discrete-response variances", discrete_variances),
        ("determinism across workers", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "acceptance {:>2} {verdict} {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
