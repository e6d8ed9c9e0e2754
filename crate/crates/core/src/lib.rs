//! Prediction of stationary, possibly infinite-variance time series by
//! minimizing the excursion metric between the target value and a
//! parametric predictor.
//!
//! The crate is organised bottom-up:
//!
//! - [`distributions`]: marginal laws (cdf, density, quantile, sampler, estimators)
//! - [`processes`]: seedable simulators on a regular grid
//! - [`metrics`]: excursion, Gini, copula-diagonal and Wasserstein computations
//! - [`objective`]: learning samples, empirical functionals and their subgradients
//! - [`optimize`]: batch / online projected subgradient descent
//! - [`baselines`]: exact Gaussian excursion weights and simple kriging
//! - [`harness`]: end-to-end fit / evaluate experiments and CSV output

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod objective;
pub mod optimize;
pub mod processes;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RngStream;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits, the precision used by every
/// CSV this crate writes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
