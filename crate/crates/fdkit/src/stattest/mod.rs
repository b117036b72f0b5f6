//! Evaluation functions, analytic thresholds, decision logic and the
//! FDR/FAR/MT2D detection indicators.

mod eval;
mod indicators;
mod threshold;

pub use eval::{estimate_moments, eval_jkf, eval_t2, EvalSeries};
pub use indicators::{decide, indicators, DetectionOutcome};
pub use threshold::{chi2_threshold, t2_threshold, Threshold, ThresholdFamily};
