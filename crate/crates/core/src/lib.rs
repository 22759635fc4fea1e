//! Blockwise-shrinkage series estimation for heteroscedastic additive
//! regression with auxiliary covariates, plus simulators, risk evaluation
//! and a Monte Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block_scheme;
pub mod error;
pub mod estimators;
pub mod function_space;
pub mod harness;
pub mod risk_eval;
pub mod sim_models;

pub use error::{Error, Result};
