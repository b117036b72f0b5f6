use serde::Serialize;

use super::eval::EvalSeries;
use super::threshold::Threshold;
use crate::error::{FdError, Result};

/// Detection indicators of one run. The false alarm rate is computed over
/// pre-onset evaluation samples only, the detection rate over post-onset
/// samples only; time to detection counts from 1 at the onset sample and is
/// reported only when a post-onset alarm exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub alarms: Vec<bool>,
    pub fault_onset: usize,
    pub fdr: f64,
    pub far: f64,
    pub mt2d: Option<f64>,
    pub detected: bool,
}

/// Decision logic: alarm when the evaluation reaches the threshold.
/// The boundary counts as faulty.
pub fn decide(evals: &EvalSeries, th: &Threshold) -> Vec<bool> {
    evals.values.iter().map(|&v| v >= th.value).collect()
}

/// Computes FAR/FDR/MT2D from an alarm sequence whose first element is the
/// evaluation sample at absolute index `eval_start`.
pub fn indicators(alarms: &[bool], fault_onset: usize, eval_start: usize) -> Result<DetectionOutcome> {
    if fault_onset <= eval_start {
        return Err(FdError::validation(
            "fault onset must lie after the evaluation start",
        ));
    }
    let pre_len = fault_onset - eval_start;
    if alarms.len() <= pre_len {
        return Err(FdError::validation(
            "no post-onset evaluation samples available",
        ));
    }
    let (pre, post) = alarms.split_at(pre_len);
    let far = pre.iter().filter(|&&a| a).count() as f64 / pre.len() as f64;
    let fdr = post.iter().filter(|&&a| a).count() as f64 / post.len() as f64;
    let first_alarm = post.iter().position(|&a| a);
    let mt2d = first_alarm.map(|k| (k + 1) as f64);
    Ok(DetectionOutcome {
        alarms: alarms.to_vec(),
        fault_onset,
        fdr,
        far,
        detected: mt2d.is_some(),
        mt2d,
    })
}
