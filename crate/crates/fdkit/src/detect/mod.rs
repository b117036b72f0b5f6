//! Detection-method strategies.
//!
//! Every method pairs a residual generator with an evaluation function and a
//! threshold rule behind the [`FaultDetector`] trait. Implementations are
//! registered by name in a [`DetectorRegistry`] and selected at runtime from
//! experiment configuration, so new residual/test designs can be benchmarked
//! against the built-ins without touching the harness.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FdError, Result};
use crate::lti::{solve_dare, ss_to_tf, KalmanSolution, RationalTransferFunction, StateSpaceModel};
use crate::residual::{
    apply_filter, design_butterworth, residual_kf_statespace, residual_oe, residual_pe,
    DigitalFilter, FilterSpec, ResidualSeries, DEFAULT_TRANSIENT,
};
use crate::signal::SimulationRecord;
use crate::stattest::{chi2_threshold, estimate_moments, eval_jkf, eval_t2, t2_threshold, EvalSeries, Threshold};

/// Plant-derived quantities shared by all detectors of an experiment.
#[derive(Debug)]
pub struct PlantArtifacts {
    pub model: StateSpaceModel,
    pub kalman: KalmanSolution,
    pub g: RationalTransferFunction,
    pub h: RationalTransferFunction,
}

impl PlantArtifacts {
    pub fn new(model: StateSpaceModel) -> Result<Self> {
        let kalman = solve_dare(&model)?;
        let (g, h) = ss_to_tf(&model, &kalman.k)?;
        Ok(Self {
            model,
            kalman,
            g,
            h,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.kalman.lambda[(0, 0)]
    }
}

/// Residual a T^2 detector evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSource {
    Oe,
    Pe,
}

/// Configuration of one detection method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSpec {
    /// Row label in reports.
    pub name: String,
    /// Registry key of the strategy ("jkf" or "t2" for the built-ins).
    pub detector: String,
    /// Residual source for T^2 methods.
    #[serde(default)]
    pub residual: Option<ResidualSource>,
    /// Window length for the windowed innovation statistic.
    #[serde(default)]
    pub s: Option<usize>,
    /// Optional post-filter applied to the residual.
    #[serde(default)]
    pub filter: Option<FilterSpec>,
    /// Confidence level of the threshold.
    pub alpha: f64,
}

impl MethodSpec {
    pub fn jkf(name: &str, s: usize, alpha: f64) -> Self {
        Self {
            name: name.into(),
            detector: "jkf".into(),
            residual: None,
            s: Some(s),
            filter: None,
            alpha,
        }
    }

    pub fn t2(name: &str, residual: ResidualSource, filter: Option<FilterSpec>, alpha: f64) -> Self {
        Self {
            name: name.into(),
            detector: "t2".into(),
            residual: Some(residual),
            s: None,
            filter,
            alpha,
        }
    }
}

/// A residual/evaluation/threshold strategy.
pub trait FaultDetector: Send {
    fn name(&self) -> &str;

    /// Samples at the head of a record this method cannot evaluate reliably.
    fn warmup(&self) -> usize;

    /// Learns data-driven quantities (moments, thresholds) from a fault-free
    /// training record. Built-ins with analytic thresholds accept any record.
    fn fit(&mut self, training: &SimulationRecord) -> Result<()>;

    /// Evaluation-function values over a test record plus the threshold.
    fn evaluate(&self, test: &SimulationRecord) -> Result<(EvalSeries, Threshold)>;

    /// Residual trace on a record, for diagnostics and plot dumps.
    fn residual(&self, record: &SimulationRecord) -> Result<ResidualSeries>;

    /// Frequency response of the post-filter, when the method has one.
    fn filter(&self) -> Option<&DigitalFilter>;
}

type DetectorBuilder =
    Box<dyn Fn(&MethodSpec, &Arc<PlantArtifacts>) -> Result<Box<dyn FaultDetector>> + Send + Sync>;

/// Name-indexed registry of detector strategies.
pub struct DetectorRegistry {
    builders: BTreeMap<String, DetectorBuilder>,
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    /// Registry with the built-in "jkf" and "t2" strategies.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("jkf", |spec, artifacts| {
            let s = spec
                .s
                .ok_or_else(|| FdError::Config(format!("method '{}': jkf requires s", spec.name)))?;
            if spec.filter.is_some() {
                return Err(FdError::Config(format!(
                    "method '{}': the jkf strategy takes no post-filter",
                    spec.name
                )));
            }
            Ok(Box::new(JkfDetector {
                name: spec.name.clone(),
                s,
                alpha: spec.alpha,
                artifacts: Arc::clone(artifacts),
            }))
        });
        reg.register("t2", |spec, artifacts| {
            let source = spec.residual.ok_or_else(|| {
                FdError::Config(format!("method '{}': t2 requires a residual source", spec.name))
            })?;
            let filter = spec.filter.as_ref().map(design_butterworth).transpose()?;
            Ok(Box::new(T2Detector {
                name: spec.name.clone(),
                source,
                filter,
                alpha: spec.alpha,
                artifacts: Arc::clone(artifacts),
                moments: None,
            }))
        });
        reg
    }

    pub fn register(
        &mut self,
        key: impl Into<String>,
        builder: impl Fn(&MethodSpec, &Arc<PlantArtifacts>) -> Result<Box<dyn FaultDetector>>
            + Send
            + Sync
            + 'static,
    ) {
        self.builders.insert(key.into(), Box::new(builder));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(
        &self,
        spec: &MethodSpec,
        artifacts: &Arc<PlantArtifacts>,
    ) -> Result<Box<dyn FaultDetector>> {
        if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
            return Err(FdError::Config(format!(
                "method '{}': alpha must lie in (0, 1)",
                spec.name
            )));
        }
        let builder = self.builders.get(&spec.detector).ok_or_else(|| {
            FdError::Config(format!(
                "method '{}': unknown detector '{}' (available: {})",
                spec.name,
                spec.detector,
                self.builders.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })?;
        builder(spec, artifacts)
    }
}

/// Windowed chi-squared statistic over the Kalman innovation, with the
/// analytic threshold from the known innovation covariance.
struct JkfDetector {
    name: String,
    s: usize,
    alpha: f64,
    artifacts: Arc<PlantArtifacts>,
}

impl FaultDetector for JkfDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn warmup(&self) -> usize {
        self.s
    }

    fn fit(&mut self, _training: &SimulationRecord) -> Result<()> {
        Ok(())
    }

    fn evaluate(&self, test: &SimulationRecord) -> Result<(EvalSeries, Threshold)> {
        let eps = self.residual(test)?;
        let evals = eval_jkf(&eps, self.artifacts.lambda(), self.s)?;
        let th = chi2_threshold(self.s + 1, self.alpha)?;
        Ok((evals, th))
    }

    fn residual(&self, record: &SimulationRecord) -> Result<ResidualSeries> {
        residual_kf_statespace(&self.artifacts.model, &self.artifacts.kalman.k, record)
    }

    fn filter(&self) -> Option<&DigitalFilter> {
        None
    }
}

/// Hotelling statistic over an (optionally post-filtered) OE or PE residual,
/// with moments estimated from fault-free training data and the scaled-F
/// threshold.
struct T2Detector {
    name: String,
    source: ResidualSource,
    filter: Option<DigitalFilter>,
    alpha: f64,
    artifacts: Arc<PlantArtifacts>,
    moments: Option<(f64, f64, usize)>,
}

impl T2Detector {
    fn base_residual(&self, record: &SimulationRecord) -> Result<ResidualSeries> {
        match self.source {
            ResidualSource::Oe => residual_oe(record, &self.artifacts.g),
            ResidualSource::Pe => residual_pe(record, &self.artifacts.g, &self.artifacts.h),
        }
    }
}

impl FaultDetector for T2Detector {
    fn name(&self) -> &str {
        &self.name
    }

    fn warmup(&self) -> usize {
        match &self.filter {
            Some(f) => f.settling_len(),
            None => DEFAULT_TRANSIENT,
        }
    }

    fn fit(&mut self, training: &SimulationRecord) -> Result<()> {
        let residual = self.residual(training)?;
        let (mu, var) = estimate_moments(&residual)?;
        self.moments = Some((mu, var, residual.settled().len()));
        Ok(())
    }

    fn evaluate(&self, test: &SimulationRecord) -> Result<(EvalSeries, Threshold)> {
        let (mu, var, n) = self.moments.ok_or_else(|| {
            FdError::validation(format!("method '{}' was not fitted", self.name))
        })?;
        let residual = self.residual(test)?;
        let evals = eval_t2(&residual, mu, var)?;
        let th = t2_threshold(1, n, self.alpha)?;
        Ok((evals, th))
    }

    fn residual(&self, record: &SimulationRecord) -> Result<ResidualSeries> {
        let base = self.base_residual(record)?;
        Ok(match &self.filter {
            Some(f) => apply_filter(f, &base),
            None => base,
        })
    }

    fn filter(&self) -> Option<&DigitalFilter> {
        self.filter.as_ref()
    }
}
