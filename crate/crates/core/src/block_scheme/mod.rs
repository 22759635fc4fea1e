//! Frequency blocks and sample-splitting groups.
//!
//! For a sample of size `n`: `b = floor(ln(n + 20))`, `c = floor(ln b)`,
//! split size `m = floor(n / (divisor * c))`. The first `b` blocks hold a
//! single frequency each; later blocks have length `floor((1 + 1/b)^k)`.
//! Blocks are added until their total length exceeds `n^{1/3} c`, and there
//! is always at least one geometric block.
//!
//! A divisor of 1 means no splitting: every group is the whole sample.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScheme {
    pub n: usize,
    pub b_n: usize,
    pub c_n: usize,
    /// Split size; equals `n` without splitting.
    pub m: usize,
    pub divisor: usize,
    /// Block lengths `L_1..L_K`.
    #[serde(rename = "L")]
    pub lengths: Vec<usize>,
    /// Blocks as half-open frequency ranges `[start, end)`.
    pub blocks: Vec<[usize; 2]>,
}

/// `floor(ln(n + 20))`.
pub fn coarse_cutoff(n: usize) -> usize {
    ((n as f64 + 20.0).ln()).floor() as usize
}

pub fn build_scheme(n: usize, divisor: usize) -> Result<BlockScheme> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    if divisor == 0 {
        return Err(Error::InvalidParameter(
            "split divisor must be positive".into(),
        ));
    }
    let b = coarse_cutoff(n);
    let c = ((b as f64).ln().floor() as usize).max(1);
    let m = if divisor == 1 {
        n
    } else {
        let m = n / (divisor * c);
        if m <= 3 {
            return Err(Error::DegenerateScheme { n, m });
        }
        m
    };

    let budget = (n as f64).cbrt() * c as f64;
    let ratio = 1.0 + 1.0 / b as f64;
    let mut lengths = Vec::new();
    let mut total = 0usize;
    let mut k = 0usize;
    while total as f64 <= budget || k <= b {
        k += 1;
        let len = if k <= b {
            1
        } else {
            ratio.powi(k as i32).floor() as usize
        };
        lengths.push(len);
        total += len;
    }
    let mut blocks = Vec::with_capacity(lengths.len());
    let mut start = 0;
    for &len in &lengths {
        blocks.push([start, start + len]);
        start += len;
    }
    Ok(BlockScheme {
        n,
        b_n: b,
        c_n: c,
        m,
        divisor,
        lengths,
        blocks,
    })
}

impl BlockScheme {
    pub fn block_count(&self) -> usize {
        self.lengths.len()
    }

    /// Number of frequencies covered by all blocks.
    pub fn coefficient_count(&self) -> usize {
        self.blocks.last().map_or(0, |b| b[1])
    }

    pub fn block(&self, k: usize) -> Range<usize> {
        let [a, b] = self.blocks[k];
        a..b
    }

    pub fn is_split(&self) -> bool {
        self.divisor > 1
    }

    /// Rows of split group `s` (1-based), or all rows without splitting.
    pub fn group(&self, s: usize) -> Range<usize> {
        if self.is_split() {
            (s - 1) * self.m..s * self.m
        } else {
            0..self.n
        }
    }

    /// Rows after the first `groups` split groups, or all rows without
    /// splitting.
    pub fn rest(&self, groups: usize) -> Range<usize> {
        if self.is_split() {
            groups * self.m..self.n
        } else {
            0..self.n
        }
    }

    /// Budget `n^{1/3} c_n` that the total block length must exceed.
    pub fn budget(&self) -> f64 {
        (self.n as f64).cbrt() * self.c_n as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Largest ratio `L_{k+1} / L_k` among the geometric blocks.
pub fn block_ratio_check(scheme: &BlockScheme) -> f64 {
    let b = scheme.b_n;
    scheme
        .lengths
        .windows(2)
        .enumerate()
        .filter(|(k, _)| k + 1 > b)
        .map(|(_, w)| w[1] as f64 / w[0] as f64)
        .fold(1.0, f64::max)
}
