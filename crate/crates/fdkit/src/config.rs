//! Experiment configuration: JSON-compatible text with comments, parsed with
//! precise error paths, plus key=value overrides.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::detect::MethodSpec;
use crate::error::{FdError, Result};
use crate::lti::StateSpaceModel;
use crate::signal::{FaultKind, FaultSpec};

/// Plain-text model block: matrices row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub sigma_w: Vec<Vec<f64>>,
    pub sigma_v: Vec<Vec<f64>>,
    pub sigma_wv: Vec<Vec<f64>>,
}

fn to_matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(FdError::Config(format!("matrix '{name}' must be nonempty")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(FdError::Config(format!("matrix '{name}' rows have uneven lengths")));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().copied(),
    ))
}

impl ModelConfig {
    pub fn to_model(&self) -> Result<StateSpaceModel> {
        StateSpaceModel::new(
            to_matrix(&self.a, "a")?,
            to_matrix(&self.b, "b")?,
            to_matrix(&self.c, "c")?,
            to_matrix(&self.sigma_w, "sigma_w")?,
            to_matrix(&self.sigma_v, "sigma_v")?,
            to_matrix(&self.sigma_wv, "sigma_wv")?,
        )
    }
}

/// Full Monte Carlo experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// Fault shape; the onset is the top-level `fault_onset`.
    pub fault: FaultKind,
    pub methods: Vec<MethodSpec>,
    pub n_train: usize,
    pub n_test: usize,
    pub fault_onset: usize,
    pub runs: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn fault_spec(&self) -> FaultSpec {
        FaultSpec {
            kind: self.fault,
            onset: self.fault_onset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(FdError::Config("runs must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(FdError::Config("at least one method is required".into()));
        }
        if self.fault_onset >= self.n_test {
            return Err(FdError::Config(
                "fault_onset must lie inside the test horizon".into(),
            ));
        }
        self.fault_spec()
            .validate(self.n_test)
            .map_err(|e| FdError::Config(e.to_string()))
    }
}

/// Strips // line comments and /* */ block comments outside of strings.
pub fn strip_comments(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut in_string = false;
    while i < bytes.len() {
        let ch = bytes[i];
        if in_string {
            out.push(ch as char);
            if ch == b'\\' && i + 1 < bytes.len() {
                out.push(bytes[i + 1] as char);
                i += 2;
                continue;
            }
            if ch == b'"' {
                in_string = false;
            }
            i += 1;
        } else if ch == b'"' {
            in_string = true;
            out.push('"');
            i += 1;
        } else if ch == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if ch == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'*' {
            i += 2;
            while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                i += 1;
            }
            i = (i + 2).min(bytes.len());
        } else {
            out.push(ch as char);
            i += 1;
        }
    }
    out
}

/// Applies `key=value` overrides to a parsed JSON tree. Keys use dotted paths
/// (`runs=1`, `fault.amplitude=10`, `methods.0.alpha=0.95`); values parse as
/// JSON with a fallback to plain strings.
pub fn apply_overrides(tree: &mut serde_json::Value, overrides: &[String]) -> Result<()> {
    for entry in overrides {
        let (path, raw) = entry.split_once('=').ok_or_else(|| {
            FdError::Config(format!("override '{entry}' must have the form key=value"))
        })?;
        let value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let segments: Vec<&str> = path.split('.').collect();
        let (last, parents) = segments.split_last().expect("split_once yields nonempty");
        let pointer: String = parents.iter().map(|s| format!("/{s}")).collect();
        let parent = tree.pointer_mut(&pointer).ok_or_else(|| {
            FdError::Config(format!("override '{path}': path '{pointer}' not found"))
        })?;
        match parent {
            serde_json::Value::Object(map) => {
                map.insert(last.to_string(), value);
            }
            serde_json::Value::Array(arr) => {
                let idx: usize = last.parse().map_err(|_| {
                    FdError::Config(format!("override '{path}': '{last}' is not an array index"))
                })?;
                let slot = arr.get_mut(idx).ok_or_else(|| {
                    FdError::Config(format!("override '{path}': index {idx} out of range"))
                })?;
                *slot = value;
            }
            _ => {
                return Err(FdError::Config(format!(
                    "override '{path}': parent is not an object or array"
                )))
            }
        }
    }
    Ok(())
}

/// Parses config text (comments allowed) into any deserializable type, with
/// the JSON path of the offending key on failure.
pub fn parse_config<T: serde::de::DeserializeOwned>(text: &str, overrides: &[String]) -> Result<T> {
    let stripped = strip_comments(text);
    let mut tree: serde_json::Value = serde_json::from_str(&stripped)
        .map_err(|e| FdError::Config(format!("invalid JSON: {e}")))?;
    apply_overrides(&mut tree, overrides)?;
    serde_path_to_error::deserialize(tree)
        .map_err(|e| FdError::Config(format!("at '{}': {}", e.path(), e.inner())))
}

pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| FdError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config(&text, overrides)
}
