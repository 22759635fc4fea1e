//! Finite tensor-product cosine expansions.

use serde::{Deserialize, Serialize};

use super::basis::{fill_basis, phi};
use super::grid::{node, GridFunction};
use crate::error::{Error, Result};

/// Contracts axis `axis` of a row-major tensor with a `rows x shape[axis]`
/// matrix, returning the new tensor and its shape.
pub(crate) fn mode_product(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    mat: &[f64],
    rows: usize,
) -> (Vec<f64>, Vec<usize>) {
    let len = shape[axis];
    debug_assert_eq!(mat.len(), rows * len);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        let src = &data[o * len * inner..(o + 1) * len * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for r in 0..rows {
            let mrow = &mat[r * len..(r + 1) * len];
            let drow = &mut dst[r * inner..(r + 1) * inner];
            for (k, &m) in mrow.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let srow = &src[k * inner..(k + 1) * inner];
                for (d, &s) in drow.iter_mut().zip(srow) {
                    *d += m * s;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

/// `count x nodes` analysis matrix: entry `(j, i)` is `phi_j(x_i) / nodes`.
fn analysis_matrix(count: usize, nodes: usize) -> Vec<f64> {
    let mut mat = vec![0.0; count * nodes];
    let mut col = vec![0.0; count];
    for i in 0..nodes {
        fill_basis(node(i, nodes), &mut col);
        for j in 0..count {
            mat[j * nodes + i] = col[j] / nodes as f64;
        }
    }
    mat
}

/// `nodes x count` synthesis matrix: entry `(i, j)` is `phi_j(x_i)`.
fn synthesis_matrix(count: usize, nodes: usize) -> Vec<f64> {
    let mut mat = vec![0.0; nodes * count];
    for i in 0..nodes {
        fill_basis(node(i, nodes), &mut mat[i * count..(i + 1) * count]);
    }
    mat
}

/// Coefficients of a cosine expansion on `[0,1]^k` indexed by the box
/// `{0..extents[0]} x ... x {0..extents[k-1]}` (row-major, axis 0 slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    extents: Vec<usize>,
    coefs: Vec<f64>,
}

impl CosineSeries {
    pub fn zeros(extents: Vec<usize>) -> Self {
        let total = extents.iter().product();
        Self {
            extents,
            coefs: vec![0.0; total],
        }
    }

    pub fn from_coefficients(extents: Vec<usize>, coefs: Vec<f64>) -> Result<Self> {
        let total: usize = extents.iter().product();
        if coefs.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: coefs.len(),
            });
        }
        Ok(Self { extents, coefs })
    }

    /// Univariate expansion with coefficients `theta_0, theta_1, ...`.
    pub fn univariate(coefs: Vec<f64>) -> Self {
        Self {
            extents: vec![coefs.len()],
            coefs,
        }
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefs
    }

    pub fn flat_index(&self, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.extents.len() {
            return None;
        }
        let mut flat = 0;
        for (&i, &e) in idx.iter().zip(&self.extents) {
            if i >= e {
                return None;
            }
            flat = flat * e + i;
        }
        Some(flat)
    }

    /// Coefficient at a multi-index; zero outside the stored box.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.flat_index(idx).map_or(0.0, |f| self.coefs[f])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let flat = self.flat_index(idx).ok_or_else(|| {
            Error::InvalidParameter(format!("index {idx:?} outside extents {:?}", self.extents))
        })?;
        self.coefs[flat] = value;
        Ok(())
    }

    /// Multi-index of a flat position.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.extents.len()];
        for a in (0..self.extents.len()).rev() {
            idx[a] = flat % self.extents[a];
            flat /= self.extents[a];
        }
        idx
    }

    /// Iterates `(multi-index, coefficient)` over the stored box.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.coefs
            .iter()
            .enumerate()
            .map(move |(flat, &c)| (self.multi_index(flat), c))
    }

    /// Multiplies each coefficient by `weight(multi-index)`.
    pub fn reweighted(&self, weight: impl Fn(&[usize]) -> f64) -> Self {
        let coefs = self
            .coefs
            .iter()
            .enumerate()
            .map(|(flat, &c)| c * weight(&self.multi_index(flat)))
            .collect();
        Self {
            extents: self.extents.clone(),
            coefs,
        }
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        self.coefs.iter().map(|c| c * c).sum()
    }

    /// Quadrature Fourier coefficients of `f` for indices inside `extents`.
    /// Every extent must stay below half the node count.
    pub fn from_grid(f: &GridFunction, extents: &[usize]) -> Result<Self> {
        if extents.len() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: extents.len(),
            });
        }
        let nodes = f.nodes();
        for &e in extents {
            if e > nodes / 2 {
                return Err(Error::Resolution {
                    frequency: e.saturating_sub(1),
                    nodes,
                });
            }
        }
        let mut data = f.values().to_vec();
        let mut shape = f.shape();
        for (axis, &e) in extents.iter().enumerate() {
            let mat = analysis_matrix(e, nodes);
            let (d, s) = mode_product(&data, &shape, axis, &mat, e);
            data = d;
            shape = s;
        }
        Ok(Self {
            extents: extents.to_vec(),
            coefs: data,
        })
    }

    /// Values of the expansion at every node of a `nodes`-per-axis grid.
    pub fn to_grid(&self, nodes: usize) -> Result<GridFunction> {
        let mut data = self.coefs.clone();
        let mut shape = self.extents.clone();
        for axis in 0..self.extents.len() {
            let mat = synthesis_matrix(self.extents[axis], nodes);
            let (d, s) = mode_product(&data, &shape, axis, &mat, nodes);
            data = d;
            shape = s;
        }
        GridFunction::from_values(self.extents.len(), nodes, data)
    }

    /// Pointwise evaluation.
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.extents.len());
        self.eval_split(point[0], &point[1..])
    }

    /// Evaluation at `(x, z)` with `z` the trailing coordinates.
    pub fn eval_split(&self, x: f64, z: &[f64]) -> f64 {
        let k = self.extents.len();
        debug_assert_eq!(z.len() + 1, k);
        match k {
            1 => {
                let mut acc = 0.0;
                for (j, &c) in self.coefs.iter().enumerate() {
                    if c != 0.0 {
                        acc += c * phi(j, x);
                    }
                }
                acc
            }
            _ => {
                let bx = super::basis::basis_vector(x, self.extents[0]);
                let bz: Vec<Vec<f64>> = z
                    .iter()
                    .zip(&self.extents[1..])
                    .map(|(&v, &e)| super::basis::basis_vector(v, e))
                    .collect();
                let inner: usize = self.extents[1..].iter().product();
                let mut acc = 0.0;
                let mut idx = vec![0usize; k - 1];
                for (i, &px) in bx.iter().enumerate() {
                    let block = &self.coefs[i * inner..(i + 1) * inner];
                    let mut s = 0.0;
                    idx.iter_mut().for_each(|v| *v = 0);
                    for &c in block {
                        if c != 0.0 {
                            let mut w = c;
                            for (a, &ia) in idx.iter().enumerate() {
                                w *= bz[a][ia];
                            }
                            s += w;
                        }
                        // odometer increment
                        for a in (0..k - 1).rev() {
                            idx[a] += 1;
                            if idx[a] < self.extents[a + 1] {
                                break;
                            }
                            idx[a] = 0;
                        }
                    }
                    acc += px * s;
                }
                acc
            }
        }
    }

    /// Fixes the first coordinate at `x`, returning the expansion in the
    /// remaining coordinates.
    pub fn restrict_first(&self, x: f64) -> Result<Self> {
        if self.extents.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.extents.len(),
            });
        }
        let bx = super::basis::basis_vector(x, self.extents[0]);
        let (data, shape) = mode_product(&self.coefs, &self.extents, 0, &bx, 1);
        Ok(Self {
            extents: shape[1..].to_vec(),
            coefs: data,
        })
    }

    /// Value at a point given precomputed per-axis basis values; `bases[a]`
    /// must hold at least `extents[a]` entries.
    pub fn eval_with_bases(&self, bases: &[&[f64]]) -> f64 {
        debug_assert_eq!(bases.len(), self.extents.len());
        contract(&self.coefs, &self.extents, bases)
    }

    /// Adds `weight * prod_a bases[a][idx_a]` to every coefficient.
    pub fn accumulate_outer(&mut self, bases: &[&[f64]], weight: f64) {
        debug_assert_eq!(bases.len(), self.extents.len());
        accumulate(&mut self.coefs, &self.extents, bases, weight);
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.coefs.iter_mut().for_each(|c| *c *= factor);
    }

    /// Empirical projection coefficients
    /// `c_idx = (1/len) * sum_l value_l * prod_a phi_{idx_a}(point_l[a])`
    /// for every index in the box `extents`.
    pub fn from_samples<'a, I>(extents: Vec<usize>, samples: I, len: usize) -> Self
    where
        I: IntoIterator<Item = (f64, &'a [f64], f64)>,
    {
        // samples yield (x, z, value)
        let k = extents.len();
        let total: usize = extents.iter().product();
        let mut coefs = vec![0.0; total];
        let mut bases: Vec<Vec<f64>> = extents.iter().map(|&e| vec![0.0; e]).collect();
        let mut outer = vec![0.0; total];
        for (x, z, value) in samples {
            if value == 0.0 {
                continue;
            }
            fill_basis(x, &mut bases[0]);
            for a in 1..k {
                fill_basis(z[a - 1], &mut bases[a]);
            }
            // outer product of the per-axis basis vectors
            outer[..extents[0]].copy_from_slice(&bases[0]);
            let mut filled = extents[0];
            for b in bases.iter().skip(1) {
                let e = b.len();
                for p in (0..filled).rev() {
                    let v = outer[p];
                    for (q, &bq) in b.iter().enumerate() {
                        outer[p * e + q] = v * bq;
                    }
                }
                filled *= e;
            }
            for (c, o) in coefs.iter_mut().zip(&outer) {
                *c += value * o;
            }
        }
        if len > 0 {
            let inv = 1.0 / len as f64;
            coefs.iter_mut().for_each(|c| *c *= inv);
        }
        Self { extents, coefs }
    }
}

fn contract(coefs: &[f64], extents: &[usize], bases: &[&[f64]]) -> f64 {
    let e = extents[0];
    if extents.len() == 1 {
        return coefs[..e].iter().zip(bases[0]).map(|(c, b)| c * b).sum();
    }
    let inner: usize = extents[1..].iter().product();
    (0..e)
        .map(|i| {
            bases[0][i]
                * contract(
                    &coefs[i * inner..(i + 1) * inner],
                    &extents[1..],
                    &bases[1..],
                )
        })
        .sum()
}

fn accumulate(coefs: &mut [f64], extents: &[usize], bases: &[&[f64]], weight: f64) {
    let e = extents[0];
    if extents.len() == 1 {
        for (c, b) in coefs[..e].iter_mut().zip(bases[0]) {
            *c += weight * b;
        }
        return;
    }
    let inner: usize = extents[1..].iter().product();
    for i in 0..e {
        accumulate(
            &mut coefs[i * inner..(i + 1) * inner],
            &extents[1..],
            &bases[1..],
            weight * bases[0][i],
        );
    }
}
