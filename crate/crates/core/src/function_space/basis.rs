//! Cosine basis on [0, 1] and its tensor products.
//!
//! `phi_0(x) = 1`, `phi_j(x) = sqrt(2) cos(pi j x)` for `j >= 1`; the family is
//! orthonormal in L2[0, 1]. Tensor products `psi_s(v) = prod_t phi_{s_t}(v_t)`
//! are orthonormal on the unit cube.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

/// Frequency of a univariate cosine basis element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosineBasisIndex(pub usize);

/// Multi-frequency of a tensor-product cosine basis element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorIndex(pub Vec<usize>);

impl TensorIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// l-infinity norm, the largest frequency.
    pub fn sup_norm(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&s| s == 0)
    }
}

/// Unchecked evaluation of `phi_j(x)`.
#[inline]
pub fn phi(j: usize, x: f64) -> f64 {
    if j == 0 {
        1.0
    } else {
        SQRT_2 * (PI * j as f64 * x).cos()
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::Domain { name, value: x });
    }
    Ok(())
}

/// Evaluates `phi_j(x)`; `x` must lie in [0, 1].
pub fn cos_basis_eval(j: CosineBasisIndex, x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(phi(j.0, x))
}

/// Evaluates `psi_s(z)`, the product of univariate cosine elements.
pub fn tensor_basis_eval(s: &TensorIndex, z: &[f64]) -> Result<f64> {
    if s.dim() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: z.len(),
        });
    }
    let mut acc = 1.0;
    for (&freq, &v) in s.0.iter().zip(z) {
        check_unit("z", v)?;
        acc *= phi(freq, v);
    }
    Ok(acc)
}

/// Fills `out[j] = phi_j(x)` for `j < out.len()` using the Chebyshev
/// recurrence `cos((j+1)t) = 2 cos(t) cos(jt) - cos((j-1)t)`.
pub fn fill_basis(x: f64, out: &mut [f64]) {
    let count = out.len();
    if count == 0 {
        return;
    }
    out[0] = 1.0;
    if count == 1 {
        return;
    }
    let t = PI * x;
    let c1 = t.cos();
    let two_c1 = 2.0 * c1;
    let (mut prev, mut cur) = (1.0, c1);
    out[1] = SQRT_2 * c1;
    for slot in out.iter_mut().skip(2) {
        let next = two_c1 * cur - prev;
        prev = cur;
        cur = next;
        *slot = SQRT_2 * next;
    }
}

/// `phi_0(x), ..., phi_{count-1}(x)` as a vector.
pub fn basis_vector(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_basis(x, &mut out);
    out
}
