use std::path::Path;

use nalgebra::DVector;

use super::fault::{gen_fault, FaultSpec};
use super::noise::NoiseRealization;
use crate::error::{FdError, Result};
use crate::lti::StateSpaceModel;

/// One simulated input/output trajectory with the injected fault sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub fault_onset: usize,
    pub model_id: Option<String>,
}

impl SimulationRecord {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Writes the record as CSV with columns t,u,y,f. Floats are written in
    /// round-trip precision so re-ingestion is exact.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: std::io::Error| FdError::Io {
            path: path.display().to_string(),
            source: e,
        };
        let mut wtr = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(io),
            other => FdError::validation(format!("csv error: {other:?}")),
        })?;
        wtr.write_record(["t", "u", "y", "f"])
            .map_err(|e| FdError::validation(e.to_string()))?;
        for t in 0..self.len() {
            wtr.write_record([
                t.to_string(),
                self.u[t].to_string(),
                self.y[t].to_string(),
                self.f[t].to_string(),
            ])
            .map_err(|e| FdError::validation(e.to_string()))?;
        }
        wtr.flush().map_err(io_err)?;
        Ok(())
    }

    /// Reads a record from CSV. Requires columns t,u,y; f is optional and
    /// defaults to zero. `fault_onset` is supplied by the caller since the
    /// file format does not carry it.
    pub fn read_csv(path: &Path, fault_onset: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => FdError::Io {
                path: path.display().to_string(),
                source: io,
            },
            other => FdError::validation(format!("csv error: {other:?}")),
        })?;
        let headers = rdr
            .headers()
            .map_err(|e| FdError::Ingestion {
                row: 0,
                message: e.to_string(),
            })?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (iu, iy) = match (col("u"), col("y")) {
            (Some(u), Some(y)) => (u, y),
            _ => {
                return Err(FdError::Ingestion {
                    row: 0,
                    message: "required columns t,u,y not found in header".into(),
                })
            }
        };
        let if_ = col("f");
        let mut u = Vec::new();
        let mut y = Vec::new();
        let mut f = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let row = idx + 1;
            let rec = rec.map_err(|e| FdError::Ingestion {
                row,
                message: e.to_string(),
            })?;
            let parse = |i: usize| -> Result<f64> {
                let raw = rec.get(i).ok_or_else(|| FdError::Ingestion {
                    row,
                    message: format!("missing column {i}"),
                })?;
                let val: f64 = raw.parse().map_err(|_| FdError::Ingestion {
                    row,
                    message: format!("cannot parse '{raw}' as a number"),
                })?;
                if !val.is_finite() {
                    return Err(FdError::Ingestion {
                        row,
                        message: "non-finite cell".into(),
                    });
                }
                Ok(val)
            };
            u.push(parse(iu)?);
            y.push(parse(iy)?);
            f.push(match if_ {
                Some(i) => parse(i)?,
                None => 0.0,
            });
        }
        Ok(Self {
            y,
            u,
            f,
            fault_onset,
            model_id: None,
        })
    }
}

/// Simulates x(t+1) = A x(t) + B u(t) + w(t), y(t) = C x(t) + v(t) + f(t)
/// from x(0) = 0 with the output-additive fault profile.
pub fn simulate(
    model: &StateSpaceModel,
    fault: &FaultSpec,
    noise: &NoiseRealization,
    u: &[f64],
) -> Result<SimulationRecord> {
    if !model.is_siso() {
        return Err(FdError::UnsupportedShape(
            "simulation supports SISO models only".into(),
        ));
    }
    let horizon = u.len();
    if noise.w.len() != horizon || noise.v.len() != horizon {
        return Err(FdError::validation(format!(
            "noise realization length {} does not match input length {horizon}",
            noise.v.len()
        )));
    }
    let f = gen_fault(fault, horizon)?;

    let n = model.state_dim();
    let a = model.a();
    let b = model.b();
    let c = model.c();
    let mut x = DVector::<f64>::zeros(n);
    let mut y = Vec::with_capacity(horizon);
    for t in 0..horizon {
        y.push((c * &x)[0] + noise.v[t] + f[t]);
        x = a * &x + b * u[t] + &noise.w[t];
    }
    Ok(SimulationRecord {
        y,
        u: u.to_vec(),
        f,
        fault_onset: fault.onset,
        model_id: None,
    })
}
