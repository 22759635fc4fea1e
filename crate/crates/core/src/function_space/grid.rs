//! Functions sampled on uniform midpoint grids over `[0, 1]^k`.
//!
//! Node `i` of an `N`-node axis sits at `(i + 1/2) / N`. Integrals use the
//! composite midpoint rule, under which the sampled cosine family of
//! frequencies below `N` is exactly orthonormal (the DCT-II identity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default node count per axis for univariate functions.
pub const DEFAULT_NODES_1D: usize = 512;
/// Default node count per axis for functions of two or more variables.
pub const DEFAULT_NODES_ND: usize = 128;

/// Midpoint node `i` of an `nodes`-node axis.
#[inline]
pub fn node(i: usize, nodes: usize) -> f64 {
    (i as f64 + 0.5) / nodes as f64
}

/// All midpoint nodes of an axis.
pub fn nodes_of(nodes: usize) -> Vec<f64> {
    (0..nodes).map(|i| node(i, nodes)).collect()
}

/// Per-node weights of the midpoint rule with end corrections: the
/// `h^2 (f'(1) - f'(0)) / 24` error term is removed using one-sided
/// second-order derivative estimates, which makes the rule exact for
/// quadratics. Plain midpoint weights below six nodes.
pub fn corrected_midpoint_weights(nodes: usize) -> Vec<f64> {
    let h = 1.0 / nodes as f64;
    let mut w = vec![h; nodes];
    if nodes >= 6 {
        let c = h / 24.0;
        for (i, k) in [(0, 2.0), (1, -3.0), (2, 1.0)] {
            w[i] += c * k;
            w[nodes - 1 - i] += c * k;
        }
    }
    w
}

/// Real function sampled on a tensor midpoint grid; axis 0 varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    dim: usize,
    nodes: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(dim: usize, nodes: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if nodes < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes per axis, got {nodes}"
            )));
        }
        let expected = nodes
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidGrid(format!("{nodes}^{dim} nodes overflow")))?;
        if values.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value {} at flat index {bad}",
                values[bad]
            )));
        }
        Ok(Self { dim, nodes, values })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(dim: usize, nodes: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if dim == 0 || nodes < 2 {
            return Self::from_values(dim, nodes, Vec::new());
        }
        let total = nodes.pow(dim as u32);
        let axis = nodes_of(nodes);
        let mut point = vec![0.0; dim];
        let mut values = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..dim).rev() {
                point[a] = axis[rem % nodes];
                rem /= nodes;
            }
            values.push(f(&point));
        }
        Self::from_values(dim, nodes, values)
    }

    pub fn constant(dim: usize, nodes: usize, c: f64) -> Result<Self> {
        let total = nodes.checked_pow(dim as u32).unwrap_or(0);
        Self::from_values(dim, nodes, vec![c; total])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.nodes; self.dim]
    }

    /// Midpoint-rule integral over the unit cube.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(
            self.dim,
            self.nodes,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.nodes != other.nodes {
            return Err(Error::InvalidGrid(format!(
                "node counts differ: {} vs {}",
                self.nodes, other.nodes
            )));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(self.dim, self.nodes, values)
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.zip_with(other, |u, v| a * u + b * v)
    }

    /// Midpoint integral of `(self - other)^2`.
    pub fn l2_distance_sq(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(s / self.values.len() as f64)
    }

    /// Integrates out every axis except the first, giving a function of `x`.
    pub fn integrate_trailing(&self) -> Result<Self> {
        if self.dim == 1 {
            return Ok(self.clone());
        }
        let inner = self.values.len() / self.nodes;
        let values = self
            .values
            .chunks_exact(inner)
            .map(|chunk| chunk.iter().sum::<f64>() / inner as f64)
            .collect();
        Self::from_values(1, self.nodes, values)
    }

    /// Integrates out the first axis, giving a function of the trailing axes.
    pub fn integrate_leading(&self) -> Result<Self> {
        if self.dim == 1 {
            return Err(Error::InvalidGrid(
                "cannot integrate out the only axis".into(),
            ));
        }
        let inner = self.values.len() / self.nodes;
        let mut acc = vec![0.0; inner];
        for chunk in self.values.chunks_exact(inner) {
            for (a, v) in acc.iter_mut().zip(chunk) {
                *a += v;
            }
        }
        for a in &mut acc {
            *a /= self.nodes as f64;
        }
        Self::from_values(self.dim - 1, self.nodes, acc)
    }

    /// True when every slice along the trailing axes is constant, i.e. the
    /// function depends on its first argument only.
    pub fn depends_on_first_axis_only(&self, tol: f64) -> bool {
        if self.dim == 1 {
            return true;
        }
        let inner = self.values.len() / self.nodes;
        self.values.chunks_exact(inner).all(|chunk| {
            let first = chunk[0];
            chunk.iter().all(|v| (v - first).abs() <= tol)
        })
    }

    /// Multilinear interpolation between nodes; constant extrapolation in the
    /// half-cells next to the boundary.
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.dim);
        self.eval_split(point[0], &point[1..])
    }

    /// Interpolated value at `(x, z)` where `z` holds the trailing coordinates.
    pub fn eval_split(&self, x: f64, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len() + 1, self.dim);
        let n = self.nodes;
        let locate = |v: f64| -> (usize, f64) {
            let s = v * n as f64 - 0.5;
            if s <= 0.0 {
                (0, 0.0)
            } else if s >= (n - 1) as f64 {
                (n - 2, 1.0)
            } else {
                let i = s.floor() as usize;
                (i, s - i as f64)
            }
        };
        // Up to 8 axes handled on the stack.
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        assert!(self.dim <= 8, "interpolation supports at most 8 axes");
        let (b0, f0) = locate(x);
        base[0] = b0;
        frac[0] = f0;
        for (a, &v) in z.iter().enumerate() {
            let (b, f) = locate(v);
            base[a + 1] = b;
            frac[a + 1] = f;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..self.dim {
                let up = (corner >> (self.dim - 1 - a)) & 1;
                w *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * n + base[a] + up;
            }
            if w != 0.0 {
                total += w * self.values[flat];
            }
        }
        total
    }
}
