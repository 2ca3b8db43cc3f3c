//! Power allocation for two-user downlink NOMA in a single-cell distributed
//! antenna system (DAS).
//!
//! The center base station serves both users by superposition coding while
//! the six remote radio units (RRUs) transmit only the weak user's data,
//! either from the single best RRU or from all of them ("blanket"). The
//! crate provides:
//!
//! - [`geometry`]: cell layout, user placement and Rayleigh channel sampling,
//! - [`specfun`]: exponential integrals and ergodic capacity closed forms,
//! - [`rates`]: instantaneous and ergodic rates for every scheme,
//! - [`alloc`]: max-min and max-sum-rate power allocation solvers,
//! - [`harness`]: seeded Monte-Carlo experiments, CSV and SVG output.

pub mod alloc;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod quadrature;
pub mod rates;
pub mod specfun;

pub use error::{Error, Result};

/// Noise variance used throughout unless configured otherwise.
pub const DEFAULT_NOISE_VARIANCE: f64 = 1.0;

/// `log2(1 + x)` evaluated through `ln_1p` so small SINRs keep full precision.
#[inline]
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}
