//! Residual generators and realizable post-filters.
//!
//! Two basic residuals are supported: the output error zeta = y - G u and the
//! prediction error eps = H^-1 (y - G u), the latter equal to the innovation
//! of the steady-state Kalman observer. Butterworth low-pass and band-pass
//! filters approximate the ideal frequency selector as post-filters.

mod butterworth;
mod gen;
mod series;

pub use butterworth::{design_butterworth, DigitalFilter, FilterShape, FilterSpec};
pub use gen::{apply_filter, residual_kf_statespace, residual_oe, residual_pe};
pub use series::{ResidualKind, ResidualSeries, DEFAULT_TRANSIENT};
