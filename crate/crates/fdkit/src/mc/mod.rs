//! Monte Carlo experiment harness: replicated runs over independent noise
//! realizations, per-method indicator aggregation and CSV report emission.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::detect::{DetectorRegistry, MethodSpec, PlantArtifacts};
use crate::error::{FdError, Result};
use crate::lti::StateSpaceModel;
use crate::signal::{gen_noise, simulate, FaultSpec, SimulationRecord};
use crate::stattest::{decide, indicators, DetectionOutcome};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent substream seed for (master, run, stream).
pub fn derive_seed(master: u64, run: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ run.wrapping_mul(2).wrapping_add(1)) ^ stream)
}

/// Compact per-run indicator row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunIndicators {
    pub run: usize,
    pub method: String,
    pub fdr: f64,
    pub far: f64,
    pub mt2d: Option<f64>,
    pub detected: bool,
}

/// One aggregated report row, mirroring the benchmark tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub s: Option<usize>,
    pub alpha: f64,
    pub fdr_pct: f64,
    pub far_pct: f64,
    /// Mean time to detection, conditional on detection.
    pub mt2d: Option<f64>,
    /// Number of runs with at least one post-onset alarm.
    pub detected: usize,
}

/// Aggregated Monte Carlo results.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub rows: Vec<ReportRow>,
    pub runs: usize,
    pub config_hash: String,
    pub elapsed_secs: f64,
    #[serde(skip)]
    pub per_run: Vec<RunIndicators>,
}

impl MonteCarloReport {
    pub fn row(&self, method: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

fn fnv64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// A validated experiment ready to run.
pub struct Experiment {
    config: ExperimentConfig,
    artifacts: Arc<PlantArtifacts>,
    eval_start: usize,
}

impl Experiment {
    /// Validates the configuration, solves the plant once and determines the
    /// shared evaluation start (the largest method warm-up, so that every
    /// method judges the same amount of data).
    pub fn new(config: ExperimentConfig, registry: &DetectorRegistry) -> Result<Self> {
        config.validate()?;
        let model = config.model.to_model()?;
        let artifacts = Arc::new(PlantArtifacts::new(model)?);
        let mut eval_start = 0usize;
        for spec in &config.methods {
            let det = registry.build(spec, &artifacts)?;
            eval_start = eval_start.max(det.warmup());
        }
        if config.fault_onset <= eval_start {
            return Err(FdError::Config(format!(
                "fault_onset {} must exceed the evaluation start {eval_start}",
                config.fault_onset
            )));
        }
        Ok(Self {
            config,
            artifacts,
            eval_start,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn artifacts(&self) -> &Arc<PlantArtifacts> {
        &self.artifacts
    }

    /// Absolute sample index at which every method starts being judged.
    pub fn eval_start(&self) -> usize {
        self.eval_start
    }

    /// Training (fault-free) and test realizations for one run, drawn from
    /// disjoint substreams of the master seed.
    pub fn realize(&self, run_index: usize) -> Result<(SimulationRecord, SimulationRecord)> {
        let cfg = &self.config;
        let model = &self.artifacts.model;
        let train_noise = gen_noise(
            model,
            cfg.n_train,
            derive_seed(cfg.master_seed, run_index as u64, 0),
        )?;
        let test_noise = gen_noise(
            model,
            cfg.n_test,
            derive_seed(cfg.master_seed, run_index as u64, 1),
        )?;
        let training = simulate(
            model,
            &FaultSpec::none(),
            &train_noise,
            &vec![0.0; cfg.n_train],
        )?;
        let test = simulate(model, &cfg.fault_spec(), &test_noise, &vec![0.0; cfg.n_test])?;
        Ok((training, test))
    }

    /// Runs one replication: per method, fit on the training realization,
    /// evaluate the test realization from the shared evaluation start, and
    /// compute the indicators. Deterministic given (master_seed, run_index).
    pub fn run_single(
        &self,
        registry: &DetectorRegistry,
        run_index: usize,
    ) -> Result<Vec<(String, DetectionOutcome)>> {
        let (training, test) = self.realize(run_index)?;
        let mut out = Vec::with_capacity(self.config.methods.len());
        for spec in &self.config.methods {
            let result: Result<DetectionOutcome> = (|| {
                let mut det = registry.build(spec, &self.artifacts)?;
                det.fit(&training)?;
                let (evals, th) = det.evaluate(&test)?;
                if evals.start > self.eval_start {
                    return Err(FdError::validation(
                        "evaluation starts after the shared evaluation window",
                    ));
                }
                let alarms = decide(&evals, &th);
                let offset = self.eval_start - evals.start;
                indicators(&alarms[offset..], self.config.fault_onset, self.eval_start)
            })();
            let outcome = result.map_err(|e| {
                FdError::validation(format!("method '{}': {e}", spec.name))
            })?;
            out.push((spec.name.clone(), outcome));
        }
        Ok(out)
    }

    fn collect_runs(
        &self,
        registry: &DetectorRegistry,
        parallel: bool,
    ) -> Result<Vec<RunIndicators>> {
        let run_one = |run: usize| -> Result<Vec<RunIndicators>> {
            let outcomes = self
                .run_single(registry, run)
                .map_err(|e| FdError::validation(format!("run {run}: {e}")))?;
            Ok(outcomes
                .into_iter()
                .map(|(method, o)| RunIndicators {
                    run,
                    method,
                    fdr: o.fdr,
                    far: o.far,
                    mt2d: o.mt2d,
                    detected: o.detected,
                })
                .collect())
        };
        let nested: Vec<Vec<RunIndicators>> = if parallel {
            (0..self.config.runs)
                .into_par_iter()
                .map(run_one)
                .collect::<Result<_>>()?
        } else {
            (0..self.config.runs)
                .map(run_one)
                .collect::<Result<_>>()?
        };
        Ok(nested.into_iter().flatten().collect())
    }

    /// Runs all replications (concurrently) and aggregates per-method means.
    /// The result is independent of scheduling.
    pub fn run_monte_carlo(&self, registry: &DetectorRegistry) -> Result<MonteCarloReport> {
        self.run_monte_carlo_with(registry, true)
    }

    pub fn run_monte_carlo_with(
        &self,
        registry: &DetectorRegistry,
        parallel: bool,
    ) -> Result<MonteCarloReport> {
        let started = Instant::now();
        let per_run = self.collect_runs(registry, parallel)?;
        let runs = self.config.runs;
        let rows = self
            .config
            .methods
            .iter()
            .map(|spec| {
                let mine: Vec<&RunIndicators> =
                    per_run.iter().filter(|r| r.method == spec.name).collect();
                let n = mine.len() as f64;
                let fdr_pct = 100.0 * mine.iter().map(|r| r.fdr).sum::<f64>() / n;
                let far_pct = 100.0 * mine.iter().map(|r| r.far).sum::<f64>() / n;
                let detected = mine.iter().filter(|r| r.detected).count();
                let mt2d = if detected > 0 {
                    Some(
                        mine.iter().filter_map(|r| r.mt2d).sum::<f64>() / detected as f64,
                    )
                } else {
                    None
                };
                ReportRow {
                    method: spec.name.clone(),
                    s: spec.s,
                    alpha: spec.alpha,
                    fdr_pct,
                    far_pct,
                    mt2d,
                    detected,
                }
            })
            .collect();
        let config_json =
            serde_json::to_string(&self.config).map_err(|e| FdError::Config(e.to_string()))?;
        Ok(MonteCarloReport {
            rows,
            runs,
            config_hash: format!("{:016x}", fnv64(config_json.as_bytes())),
            elapsed_secs: started.elapsed().as_secs_f64(),
            per_run,
        })
    }
}

/// Evaluation of one method on an externally supplied dataset.
pub struct DatasetEvaluation {
    pub method: String,
    pub outcome: DetectionOutcome,
    pub evals: crate::stattest::EvalSeries,
    pub threshold: crate::stattest::Threshold,
    /// Absolute sample index from which the alarms were judged.
    pub eval_start: usize,
}

/// Runs the detection pipeline on ingested records instead of fresh
/// simulations: fit each method on the fault-free training record, evaluate
/// the test record from the shared evaluation start, and compute indicators
/// against the test record's declared fault onset.
pub fn evaluate_dataset(
    model: &StateSpaceModel,
    methods: &[MethodSpec],
    registry: &DetectorRegistry,
    training: &SimulationRecord,
    test: &SimulationRecord,
) -> Result<Vec<DatasetEvaluation>> {
    if methods.is_empty() {
        return Err(FdError::Config("at least one method is required".into()));
    }
    let artifacts = Arc::new(PlantArtifacts::new(model.clone())?);
    let mut detectors = Vec::with_capacity(methods.len());
    let mut eval_start = 0usize;
    for spec in methods {
        let det = registry.build(spec, &artifacts)?;
        eval_start = eval_start.max(det.warmup());
        detectors.push((spec.name.clone(), det));
    }
    if test.fault_onset <= eval_start || test.fault_onset >= test.len() {
        return Err(FdError::validation(format!(
            "declared fault onset {} must lie between the evaluation start {eval_start} and the record end {}",
            test.fault_onset,
            test.len()
        )));
    }
    let mut out = Vec::with_capacity(detectors.len());
    for (name, mut det) in detectors {
        let result: Result<DatasetEvaluation> = (|| {
            det.fit(training)?;
            let (evals, threshold) = det.evaluate(test)?;
            if evals.start > eval_start {
                return Err(FdError::validation(
                    "evaluation starts after the shared evaluation window",
                ));
            }
            let alarms = decide(&evals, &threshold);
            let offset = eval_start - evals.start;
            let outcome = indicators(&alarms[offset..], test.fault_onset, eval_start)?;
            Ok(DatasetEvaluation {
                method: name.clone(),
                outcome,
                evals,
                threshold,
                eval_start,
            })
        })();
        out.push(result.map_err(|e| FdError::validation(format!("method '{name}': {e}")))?);
    }
    Ok(out)
}

fn csv_io_err(path: &Path) -> impl Fn(std::io::Error) -> FdError + '_ {
    move |e| FdError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Writes the aggregated report as CSV with the fixed column order
/// method,s,alpha,FDR_pct,FAR_pct,MT2D,detected. Overwrites idempotently.
pub fn emit_report(report: &MonteCarloReport, path: &Path) -> Result<()> {
    let mut out = String::from("method,s,alpha,FDR_pct,FAR_pct,MT2D,detected\n");
    for row in &report.rows {
        let s = row.s.map(|v| v.to_string()).unwrap_or_default();
        let mt2d = row.mt2d.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.method, s, row.alpha, row.fdr_pct, row.far_pct, mt2d, row.detected
        ));
    }
    std::fs::write(path, out).map_err(csv_io_err(path))
}

/// Long-form per-run CSV: run,method,FDR,FAR,MT2D,detected.
pub fn emit_per_run(report: &MonteCarloReport, path: &Path) -> Result<()> {
    let mut out = String::from("run,method,FDR,FAR,MT2D,detected\n");
    for r in &report.per_run {
        let mt2d = r.mt2d.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.run, r.method, r.fdr, r.far, mt2d, r.detected
        ));
    }
    std::fs::write(path, out).map_err(csv_io_err(path))
}
