//! Hyperbolic Gaussian analytic functions: sampling, zero counting, the exact
//! Poisson-binomial law of the zero count at intensity one, closed-form
//! large-deviation rate functions and replicated Monte Carlo experiments.
//!
//! The modules build on each other bottom-up:
//!
//! * [`specials`]: real Lambert W (both branches) and the real dilogarithm.
//! * [`gaf_model`]: coefficient law, truncated sampling, moment formulas and
//!   the circulant covariance spectrum.
//! * [`zero_counter`]: winding-number and root-finding zero counts, plus the
//!   Jensen-formula diagnostics.
//! * [`exact_l1`]: the independent-Bernoulli law of the zero count for `L = 1`.
//! * [`ldp_rates`]: limiting log-MGF, rate functions and a numeric
//!   Legendre-Fenchel oracle.
//! * [`mc_engine`]: replicated experiments, tail estimators, scaling tables
//!   and the overcrowding certificate.

pub mod error;
pub mod exact_l1;
pub mod exec;
pub mod gaf_model;
pub mod ldp_rates;
pub mod mc_engine;
pub mod rng;
pub mod specials;
pub mod stats;
pub mod zero_counter;

mod fft;
mod sum;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
