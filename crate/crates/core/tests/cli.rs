use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blockshrink::estimators::SeriesEstimate;
use blockshrink::function_space::phi;
use blockshrink::sim_models::SampledDataset;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockshrink"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("BLOCKSHRINK_LOG")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_curve(path: &Path) -> Vec<(f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["x", "fhat"]);
    r.records()
        .map(|row| {
            let row = row.unwrap();
            (row[0].parse().unwrap(), row[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--lambda", "2", "--n", "100", "--seed", "7"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let name = "lambda2-g0-n100.csv";
    let first = fs::read(a.path().join(name)).unwrap();
    assert_eq!(first, fs::read(b.path().join(name)).unwrap());
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,z1,y"));
    assert_eq!(lines.count(), 100);
    let data = SampledDataset::load(&a.path().join(name)).unwrap();
    assert_eq!(data.len(), 100);
}

#[test]
fn simulate_writes_every_component() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &["simulate", "--lambda", "1", "--g", "1,3", "--n", "50,60"],
    );
    assert_eq!(stdout.lines().count(), 4);
    for name in ["lambda1-g1-n50.csv", "lambda1-g3-n60.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    assert_eq!(code(&["simulate", "--n", "0"]), Some(2));
    assert_eq!(code(&["simulate", "--reps", "0"]), Some(2));
    assert_eq!(code(&["simulate", "--scenario", "nope"]), Some(2));
    assert_eq!(code(&["simulate", "--g", "7"]), Some(2));
    assert_eq!(code(&["table1", "--flag", "sideways"]), Some(2));
    assert_eq!(code(&["bounds", "--alpha", "0.5"]), Some(2));
    ok(dir.path(), &["simulate", "--lambda", "1", "--n", "40"]);
    let data = dir.path().join("lambda1-g0-n40.csv");
    let fit = [
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--estimator",
        "bogus",
    ];
    assert_eq!(code(&fit), Some(2));
    fs::write(dir.path().join("bad.csv"), "x,y\n0.5,abc\n").unwrap();
    let bad = dir.path().join("bad.csv");
    assert_eq!(code(&["fit", "--data", bad.to_str().unwrap()]), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "reps = 10\nunknown = 1\n").unwrap();
    assert_eq!(
        code(&["--config", cfg.to_str().unwrap(), "simulate"]),
        Some(2)
    );
}

#[test]
fn oracle_curve_is_the_cosine_sum() {
    let dir = tempfile::tempdir().unwrap();
    let theta = dir.path().join("theta.json");
    fs::write(
        &theta,
        r#"{"theta": [0.1, 0.8, -0.4, 0.25, 0.05], "d": 1.0, "n": 200}"#,
    )
    .unwrap();
    let stdout = ok(
        dir.path(),
        &[
            "fit",
            "--theta",
            theta.to_str().unwrap(),
            "--estimator",
            "oracle",
        ],
    );
    let paths: Vec<&str> = stdout.lines().collect();
    assert_eq!(paths.len(), 2);
    let est: SeriesEstimate = serde_json::from_str(&fs::read_to_string(paths[0]).unwrap()).unwrap();
    assert!(est.weights.iter().all(|w| (0.0..=1.0).contains(w)));
    let curve = read_curve(Path::new(paths[1]));
    assert_eq!(curve.len(), 201);
    assert_eq!(curve[0].0, 0.0);
    assert_eq!(curve[200].0, 1.0);
    for (x, v) in curve {
        let sum: f64 = est
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * phi(j, x))
            .sum();
        assert!((v - sum).abs() < 1e-10, "x={x}: {v} vs {sum}");
    }
}

#[test]
fn fit_recovers_the_bell() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--lambda", "2", "--n", "100"]);
    let data = dir.path().join("lambda2-g0-n100.csv");
    let stdout = ok(
        dir.path(),
        &["fit", "--data", data.to_str().unwrap(), "--no-split"],
    );
    let curve = read_curve(Path::new(stdout.lines().nth(1).unwrap()));
    let (xmax, _) =
        curve.iter().copied().fold(
            (0.0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        );
    assert!((0.4..=0.6).contains(&xmax), "maximum at {xmax}");
}

#[test]
fn fit_every_estimator_on_a_simulated_dataset() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--lambda", "1", "--n", "200"]);
    let data = dir.path().join("lambda1-g0-n200.csv");
    for tag in ["oracle", "s1", "s2", "s3", "s4", "s5", "D", "S", "E"] {
        let stdout = ok(
            dir.path(),
            &["fit", "--data", data.to_str().unwrap(), "--estimator", tag],
        );
        let est: SeriesEstimate =
            serde_json::from_str(&fs::read_to_string(stdout.lines().next().unwrap()).unwrap())
                .unwrap();
        assert!(est.difficulty > 0.0, "{tag}");
        assert_eq!(est.coefficients.len(), est.raw_coefficients.len());
    }
}

#[test]
fn bernoulli_curve_is_clamped() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simulate", "--scenario", "bernoulli", "--n", "100"],
    );
    let data = dir.path().join("bernoulli-n100.csv");
    let stdout = ok(dir.path(), &["fit", "--data", data.to_str().unwrap()]);
    for (_, v) in read_curve(Path::new(stdout.lines().nth(1).unwrap())) {
        assert!(v > 0.0 && v < 1.0);
    }
}

#[test]
fn bounds_table() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &["bounds", "--scenario", "unit", "--n", "100,200"],
    );
    let mut r = csv::Reader::from_reader(stdout.as_bytes());
    assert_eq!(
        r.headers().unwrap(),
        vec!["scenario", "alpha", "q", "n", "d", "bound"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    let bound = |i: usize| rows[i][5].parse::<f64>().unwrap();
    assert!((bound(0) - 0.019662).abs() < 5e-6, "{}", bound(0));
    assert!((bound(0) / bound(1) - 2f64.powf(2.0 / 3.0)).abs() < 1e-9);
    assert_eq!(
        fs::read_to_string(dir.path().join("bounds.csv")).unwrap(),
        stdout
    );

    let stdout = ok(
        dir.path(),
        &[
            "bounds",
            "--scenario",
            "bernoulli",
            "--n",
            "100",
            "--pivot",
            "0.5",
        ],
    );
    let mut r = csv::Reader::from_reader(stdout.as_bytes());
    let row = r.records().next().unwrap().unwrap();
    let d: f64 = row[4].parse().unwrap();
    assert!((d - 0.25).abs() < 1e-9, "d={d}");
}

#[test]
fn table1_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &[
            "table1",
            "--lambda",
            "1",
            "--n",
            "50,100",
            "--reps",
            "1",
            "--workers",
            "1",
        ],
    );
    assert!(
        stdout.contains('*'),
        "single replication must be flagged:\n{stdout}"
    );
    assert!(stdout.contains("54") && stdout.contains("108"), "{stdout}");
    let csv_text = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(csv_text.starts_with("scenario,n,estimator,aise,se,R1,R2,R3,R4,R5,R6\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("table1.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["reps"], 1);
    assert_eq!(json["cells"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("table1.txt").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "lambda = [3]\nn = [60]\nreps = 50\nseed = 11\nworkers = 2\n[estimator]\nflag = \"sobolev\"\n",
    )
    .unwrap();
    ok(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "table1", "--reps", "3"],
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("table1.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["reps"], 3);
    assert_eq!(json["config"]["seed"], 11);
    assert_eq!(json["config"]["estimator"]["flag"], "sobolev");
    assert_eq!(json["cells"][0]["scenario"], "lambda3-g0");
}

#[test]
fn verbosity_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_blockshrink"))
        .args(["simulate", "--lambda", "1", "--n", "30", "--out"])
        .arg(dir.path())
        .env("BLOCKSHRINK_LOG", "info")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("wrote"));
    let quiet = run(dir.path(), &["simulate", "--lambda", "1", "--n", "30"]);
    assert!(quiet.stderr.is_empty());
}
