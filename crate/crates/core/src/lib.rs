//! Multivariate time-series econometrics: unit-root testing, VAR lag
//! selection, Johansen cointegration, VECM estimation with weak-exogeneity
//! tests, Granger causality, residual diagnostics, orthogonalized impulse
//! responses with bootstrap bands, and forecast-error variance decomposition.
//!
//! Every estimator works on a [`dataset::Dataset`]: a set of named annual
//! series sharing one gap-free time index.

pub mod dataset;
pub mod diagnostics;
pub mod dist;
pub mod dynamics;
mod error;
pub mod johansen;
pub mod linalg;
pub mod linreg;
pub mod simulate;
pub mod unitroot;
pub mod varmodel;
pub mod vecm;

pub use error::{Error, Result};
pub use nalgebra;
