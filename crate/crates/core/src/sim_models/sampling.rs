//! Datasets and the seeded sampler.
//!
//! Every replication owns a ChaCha8 stream: the master seed selects the key
//! and the replication index selects the stream, so streams never overlap
//! and results do not depend on which thread runs which replication. Rows
//! are drawn one after another from a single stream, so the first `n` rows
//! of a sample of size `m > n` coincide with the sample of size `n`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use super::model::{DesignSampler, RegressionModel};
use super::spec::{ErrorLaw, ResponseKind};
use crate::error::{Error, Result};

/// Seed and stream that produced a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub seed: u64,
    pub stream: u64,
}

/// `n` rows of `(X, Z_1..Z_D, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDataset {
    aux_dim: usize,
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
    provenance: Option<Provenance>,
}

impl SampledDataset {
    /// `z` is row-major with `aux_dim` entries per row.
    pub fn new(aux_dim: usize, x: Vec<f64>, z: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "a dataset needs at least one row".into(),
            ));
        }
        if aux_dim == 0 {
            return Err(Error::InvalidParameter(
                "at least one auxiliary column is required".into(),
            ));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if z.len() != n * aux_dim {
            return Err(Error::DimensionMismatch {
                expected: n * aux_dim,
                got: z.len(),
            });
        }
        for (name, vals) in [("x", &x), ("z", &z)] {
            if let Some(&v) = vals.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Domain { name, value: v });
            }
        }
        if let Some(&v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite response {v}")));
        }
        Ok(Self {
            aux_dim,
            x,
            z,
            y,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Auxiliary covariates of row `l`.
    pub fn z(&self, l: usize) -> &[f64] {
        &self.z[l * self.aux_dim..(l + 1) * self.aux_dim]
    }

    /// All auxiliary covariates, row-major.
    pub fn z_flat(&self) -> &[f64] {
        &self.z
    }

    /// First `n` rows.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidParameter(format!(
                "prefix of length {n} from {} rows",
                self.len()
            )));
        }
        Ok(Self {
            aux_dim: self.aux_dim,
            x: self.x[..n].to_vec(),
            z: self.z[..n * self.aux_dim].to_vec(),
            y: self.y[..n].to_vec(),
            provenance: self.provenance.clone(),
        })
    }

    /// Header `x,z1,..,zD,y`; values in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string()];
        header.extend((1..=self.aux_dim).map(|a| format!("z{a}")));
        header.push("y".into());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.aux_dim + 2);
        for l in 0..self.len() {
            record.clear();
            record.push(self.x[l].to_string());
            record.extend(self.z(l).iter().map(f64::to_string));
            record.push(self.y[l].to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let cols = header.len();
        if cols < 3 || &header[0] != "x" || &header[cols - 1] != "y" {
            return Err(Error::Parse(format!(
                "expected header x,z1..zD,y, got {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        for (a, name) in header.iter().enumerate().take(cols - 1).skip(1) {
            if name != format!("z{a}") {
                return Err(Error::Parse(format!(
                    "column {a} should be z{a}, got {name}"
                )));
            }
        }
        let aux_dim = cols - 2;
        let (mut x, mut z, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec[i].trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("row {}, column {}: {e}", row + 1, &header[i]))
                })
            };
            x.push(parse(0)?);
            for a in 1..=aux_dim {
                z.push(parse(a)?);
            }
            y.push(parse(cols - 1)?);
        }
        Self::new(aux_dim, x, z, y)
    }

    fn sidecar(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    }

    /// Writes the CSV and, when known, its provenance next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(File::create(path)?)?;
        if let Some(p) = &self.provenance {
            let mut f = File::create(Self::sidecar(path))?;
            serde_json::to_writer_pretty(&mut f, p)?;
            writeln!(f)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut data = Self::read_csv(File::open(path)?)?;
        let meta = Self::sidecar(path);
        if meta.exists() {
            data.provenance = Some(serde_json::from_reader(File::open(meta)?)?);
        }
        Ok(data)
    }
}

/// RNG for replication `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a standardized error.
pub fn draw_error<R: Rng + ?Sized>(law: ErrorLaw, rng: &mut R) -> f64 {
    match law {
        ErrorLaw::Normal => rng.sample(StandardNormal),
        ErrorLaw::Uniform => {
            let s = 3f64.sqrt();
            rng.random_range(-s..s)
        }
        ErrorLaw::StudentT { df } => {
            let t: f64 = StudentT::new(df).expect("validated df").sample(rng);
            t * ((df - 2.0) / df).sqrt()
        }
        ErrorLaw::TwoPoint => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Inverse CDF of the linear density `1 + s (u - 1/2)` on `[0, 1]`.
fn linear_quantile(s: f64, v: f64) -> f64 {
    let a = 1.0 - 0.5 * s;
    (2.0 * v / (a + (a * a + 2.0 * s * v).sqrt())).clamp(0.0, 1.0)
}

fn draw_covariates<R: Rng + ?Sized>(model: &RegressionModel, rng: &mut R, z: &mut [f64]) -> f64 {
    match model.sampler() {
        DesignSampler::Uniform => {
            let x = rng.random::<f64>();
            z.iter_mut().for_each(|v| *v = rng.random::<f64>());
            x
        }
        DesignSampler::Product { x_slope, z_slope } => {
            let x = linear_quantile(x_slope, rng.random::<f64>());
            z.iter_mut()
                .for_each(|v| *v = linear_quantile(z_slope, rng.random::<f64>()));
            x
        }
        DesignSampler::Rejection { envelope } => loop {
            let x = rng.random::<f64>();
            z.iter_mut().for_each(|v| *v = rng.random::<f64>());
            if rng.random::<f64>() * envelope <= model.density_at(x, z) {
                break x;
            }
        },
    }
}

/// Draws `n` rows from `rng`.
pub fn sample_rows<R: Rng + ?Sized>(
    model: &RegressionModel,
    n: usize,
    rng: &mut R,
) -> Result<SampledDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    let d = model.aux_dim();
    let mut x = Vec::with_capacity(n);
    let mut z = vec![0.0; n * d];
    let mut y = Vec::with_capacity(n);
    for l in 0..n {
        let zl = &mut z[l * d..(l + 1) * d];
        let xl = draw_covariates(model, rng, zl);
        let q = model.mean_at(xl, zl);
        let yl = match model.response() {
            ResponseKind::Continuous => {
                q + model.scale_at(xl, zl) * draw_error(model.error_law(), rng)
            }
            ResponseKind::Bernoulli => {
                if !(q > 0.0 && q < 1.0) {
                    return Err(Error::Model(format!(
                        "Bernoulli mean {q} outside (0, 1) at x = {xl}"
                    )));
                }
                if rng.random::<f64>() < q {
                    1.0
                } else {
                    0.0
                }
            }
            ResponseKind::Poisson => {
                let dist = Poisson::new(q).map_err(|_| {
                    Error::Model(format!("Poisson mean {q} not positive at x = {xl}"))
                })?;
                dist.sample(rng)
            }
        };
        x.push(xl);
        y.push(yl);
    }
    SampledDataset::new(d, x, z, y)
}

/// Sample of size `n` from stream `stream` of master seed `seed`.
pub fn sample_dataset_stream(
    model: &RegressionModel,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<SampledDataset> {
    let mut rng = stream_rng(seed, stream);
    Ok(
        sample_rows(model, n, &mut rng)?.with_provenance(Provenance {
            model: model.name().to_string(),
            seed,
            stream,
        }),
    )
}

/// Sample of size `n` from stream 0 of `seed`.
pub fn sample_dataset(model: &RegressionModel, n: usize, seed: u64) -> Result<SampledDataset> {
    sample_dataset_stream(model, n, seed, 0)
}

/// Empirical moments of an error law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub draws: usize,
    pub mean: f64,
    pub second: f64,
    pub fourth: f64,
    pub mean_se: f64,
    pub second_se: f64,
    pub passed: bool,
}

/// Checks zero mean, unit variance and a finite fourth moment on `draws`
/// samples, each within four standard errors.
pub fn check_error_moments(law: ErrorLaw, draws: usize, seed: u64) -> Result<MomentReport> {
    law.validate()?;
    let mut rng = stream_rng(seed, 0);
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let e = draw_error(law, &mut rng);
        let e2 = e * e;
        s1 += e;
        s2 += e2;
        s4 += e2 * e2;
    }
    let n = draws as f64;
    let (mean, second, fourth) = (s1 / n, s2 / n, s4 / n);
    let mean_se = (second / n).sqrt();
    let second_se = ((fourth - second * second).max(0.0) / n).sqrt();
    let passed = fourth.is_finite()
        && (mean.abs() <= 4.0 * mean_se)
        && ((second - 1.0).abs() <= 4.0 * second_se);
    Ok(MomentReport {
        draws,
        mean,
        second,
        fourth,
        mean_se,
        second_se,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_quantile_inverts_cdf() {
        for &s in &[-1.5, -0.3, 0.0, 0.8, 1.9] {
            for &u in &[0.0, 0.1, 0.5, 0.77, 1.0] {
                let v = u + 0.5 * s * (u * u - u);
                assert_abs_diff_eq!(linear_quantile(s, v), u, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn error_laws_pass_moment_check() {
        for law in [
            ErrorLaw::Normal,
            ErrorLaw::Uniform,
            ErrorLaw::StudentT { df: 6.0 },
            ErrorLaw::TwoPoint,
        ] {
            let r = check_error_moments(law, 200_000, 11).unwrap();
            assert!(r.passed, "{law:?}: {r:?}");
        }
        assert!(check_error_moments(ErrorLaw::StudentT { df: 3.0 }, 10, 1).is_err());
    }

    #[test]
    fn csv_rejects_bad_header() {
        let text = "x,w,y\n0.1,0.2,0.3\n";
        assert!(SampledDataset::read_csv(text.as_bytes()).is_err());
        let text = "x,z1,y\n0.1,1.2,0.3\n";
        assert!(matches!(
            SampledDataset::read_csv(text.as_bytes()),
            Err(Error::Domain { .. })
        ));
    }
}
