//! Exact Gaussian likelihood inference for triangular arrays of stationary
//! time series, with numerical audits of the local-asymptotic-normality
//! machinery: rate matrices, Fisher limits, Toeplitz trace approximations
//! and Monte Carlo checks of asymptotic normality and efficiency.

pub mod error;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod toeplitz;

pub use error::{Error, Result};
