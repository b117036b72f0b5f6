use serde::{Deserialize, Serialize};

use crate::error::{FdError, Result};

/// Shape of an output-additive fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultKind {
    /// No fault.
    None,
    /// Constant offset of `amplitude` from the onset on.
    Step { amplitude: f64 },
    /// Linear ramp reaching `amplitude` at the end of the horizon.
    Drift { amplitude: f64 },
    /// Zero-phase sinusoid, `omega` in rad/sample.
    Sine { amplitude: f64, omega: f64 },
}

/// A fault profile: shape plus onset sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    #[serde(flatten)]
    pub kind: FaultKind,
    #[serde(default)]
    pub onset: usize,
}

impl FaultSpec {
    pub fn none() -> Self {
        Self {
            kind: FaultKind::None,
            onset: 0,
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        match self.kind {
            FaultKind::None => return Ok(()),
            FaultKind::Step { amplitude } | FaultKind::Drift { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(FdError::validation("fault amplitude must be finite"));
                }
            }
            FaultKind::Sine { amplitude, omega } => {
                if !amplitude.is_finite() {
                    return Err(FdError::validation("fault amplitude must be finite"));
                }
                if !(omega > 0.0 && omega < std::f64::consts::PI) {
                    return Err(FdError::validation("sine frequency must lie in (0, pi)"));
                }
            }
        }
        if self.onset >= horizon {
            return Err(FdError::validation(format!(
                "fault onset {} must lie inside the horizon {horizon}",
                self.onset
            )));
        }
        Ok(())
    }
}

/// Samples the fault profile over `horizon` samples; zero before the onset.
pub fn gen_fault(spec: &FaultSpec, horizon: usize) -> Result<Vec<f64>> {
    spec.validate(horizon)?;
    let mut f = vec![0.0; horizon];
    match spec.kind {
        FaultKind::None => {}
        FaultKind::Step { amplitude } => {
            for v in f[spec.onset..].iter_mut() {
                *v = amplitude;
            }
        }
        FaultKind::Drift { amplitude } => {
            let span = (horizon - spec.onset) as f64;
            for (i, v) in f[spec.onset..].iter_mut().enumerate() {
                *v = amplitude * i as f64 / span;
            }
        }
        FaultKind::Sine { amplitude, omega } => {
            for (i, v) in f[spec.onset..].iter_mut().enumerate() {
                *v = amplitude * (omega * i as f64).sin();
            }
        }
    }
    Ok(f)
}
