//! Residual generation, post-filter design and statistical evaluation for
//! model-based fault detection on discrete-time LTI stochastic systems.
//!
//! The crate covers the full benchmarking pipeline:
//!
//! - [`lti`]: state-space plants, the steady-state Kalman gain via the
//!   discrete algebraic Riccati equation, and transfer-function forms.
//! - [`signal`]: fault profiles, correlated Gaussian noise and plant
//!   simulation with output-additive faults.
//! - [`residual`]: output-error and prediction-error residuals plus
//!   Butterworth post-filters approximating the optimal frequency selector.
//! - [`spectrum`]: power spectra, the fault-to-noise performance index in
//!   time and frequency domains, and the optimal selector frequency.
//! - [`stattest`]: windowed chi-squared and Hotelling T-squared evaluation
//!   functions, analytic thresholds and FDR/FAR/MT2D indicators.
//! - [`detect`]: the detection-method strategy registry used by the
//!   Monte Carlo harness; methods are selected by name from configuration.
//! - [`mc`]: the Monte Carlo experiment harness and CSV report emission.

pub mod config;
pub mod detect;
pub mod error;
pub mod lti;
pub mod mc;
pub mod residual;
pub mod signal;
pub mod spectrum;
pub mod stattest;

pub use error::{FdError, Result};
