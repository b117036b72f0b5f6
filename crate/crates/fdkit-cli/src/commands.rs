//! Subcommand implementations: thin wrappers around the fdkit library that
//! turn configs into CSV artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use fdkit::config::{load_config, ExperimentConfig, ModelConfig};
use fdkit::detect::DetectorRegistry;
use fdkit::error::{FdError, Result};
use fdkit::mc::{emit_per_run, emit_report, derive_seed, evaluate_dataset, Experiment};
use fdkit::residual::{design_butterworth, FilterSpec};
use fdkit::signal::{gen_noise, simulate, FaultKind, FaultSpec, SimulationRecord};
use fdkit::spectrum::{
    default_grid, estimate_spectrum, optimal_frequency, perf_index_freq, perf_index_time,
};

use crate::Common;

/// Resolves an artifact path against the output directory and makes sure the
/// directory exists.
fn artifact_path(common: &Common, file: &Path) -> Result<PathBuf> {
    let path = if file.is_absolute() {
        file.to_path_buf()
    } else {
        common.output_dir.join(file)
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| FdError::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
    }
    Ok(path)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| FdError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Turns a method name into a safe file-name fragment.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

#[derive(Deserialize)]
struct ModelOnlyConfig {
    model: ModelConfig,
}

pub fn cmd_dare(common: &Common, output: &Path) -> Result<()> {
    let cfg: ModelOnlyConfig = load_config(&common.config, &common.overrides)?;
    let model = cfg.model.to_model()?;
    let sol = fdkit::lti::solve_dare(&model)?;
    let mut out = String::from("quantity,row,col,value\n");
    let mut dump = |name: &str, m: &nalgebra::DMatrix<f64>| {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let _ = writeln!(out, "{name},{i},{j},{}", m[(i, j)]);
            }
        }
    };
    dump("gain", &sol.k);
    dump("innovation_variance", &sol.lambda);
    dump("error_covariance", &sol.p);
    let _ = writeln!(out, "iterations,0,0,{}", sol.iterations);
    let _ = writeln!(out, "riccati_residual,0,0,{:e}", sol.riccati_residual(&model));
    let path = artifact_path(common, output)?;
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Deserialize)]
struct SimulateConfig {
    model: ModelConfig,
    fault: FaultKind,
    n_train: usize,
    n_test: usize,
    fault_onset: usize,
    master_seed: u64,
}

/// Reproduces exactly the realizations the Monte Carlo harness draws for
/// `run`: substream 0 is the fault-free training record, substream 1 the
/// faulty test record.
pub fn cmd_simulate(common: &Common, output: &Path, run: usize, training: bool) -> Result<()> {
    let cfg: SimulateConfig = load_config(&common.config, &common.overrides)?;
    let model = cfg.model.to_model()?;
    let record = if training {
        let noise = gen_noise(&model, cfg.n_train, derive_seed(cfg.master_seed, run as u64, 0))?;
        simulate(&model, &FaultSpec::none(), &noise, &vec![0.0; cfg.n_train])?
    } else {
        let spec = FaultSpec {
            kind: cfg.fault,
            onset: cfg.fault_onset,
        };
        spec.validate(cfg.n_test).map_err(|e| FdError::Config(e.to_string()))?;
        let noise = gen_noise(&model, cfg.n_test, derive_seed(cfg.master_seed, run as u64, 1))?;
        simulate(&model, &spec, &noise, &vec![0.0; cfg.n_test])?
    };
    let path = artifact_path(common, output)?;
    record.write_csv(&path)?;
    println!("wrote {} ({} samples)", path.display(), record.len());
    Ok(())
}

#[derive(Deserialize)]
struct FilterConfig {
    filter: FilterSpec,
}

pub fn cmd_design_filter(common: &Common, output: &Path) -> Result<()> {
    let cfg: FilterConfig = load_config(&common.config, &common.overrides)?;
    let filter = design_butterworth(&cfg.filter)?;
    let mut out = String::from("section,index,value\n");
    for (i, b) in filter.tf.num().iter().enumerate() {
        let _ = writeln!(out, "num,{i},{b}");
    }
    for (i, a) in filter.tf.den().iter().enumerate() {
        let _ = writeln!(out, "den,{i},{a}");
    }
    let _ = writeln!(out, "settling_len,0,{}", filter.settling_len());
    let path = artifact_path(common, output)?;
    write_text(&path, &out)?;

    let mut resp = String::from("omega,gain\n");
    for &w in &default_grid() {
        let _ = writeln!(resp, "{w},{}", filter.tf.gain_at(w));
    }
    let resp_path = response_path(&path);
    write_text(&resp_path, &resp)?;
    println!("wrote {} and {}", path.display(), resp_path.display());
    Ok(())
}

fn response_path(base: &Path) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("filter");
    base.with_file_name(format!("{stem}_response.csv"))
}

/// Per-method fault-to-noise indices on one realization. The faulty and
/// fault-free records share the same noise, so their residual difference
/// isolates the fault signature.
pub fn cmd_perf_index(common: &Common, output: &Path, run: usize) -> Result<()> {
    let cfg: ExperimentConfig = load_config(&common.config, &common.overrides)?;
    cfg.validate()?;
    let registry = DetectorRegistry::with_builtins();
    let exp = Experiment::new(cfg.clone(), &registry)?;
    let model = exp.artifacts().model.clone();
    let noise = gen_noise(&model, cfg.n_test, derive_seed(cfg.master_seed, run as u64, 1))?;
    let zero_u = vec![0.0; cfg.n_test];
    let faulty = simulate(&model, &cfg.fault_spec(), &noise, &zero_u)?;
    let normal = simulate(&model, &FaultSpec::none(), &noise, &zero_u)?;

    let grid = default_grid();
    let mut out = String::from("method,J_time,J_freq,omega0,J_opt\n");
    for spec in &cfg.methods {
        let det = registry.build(spec, exp.artifacts())?;
        let rf = det.residual(&faulty)?;
        let r0 = det.residual(&normal)?;
        let j_time = perf_index_time(&rf, &r0)?;
        let fault_part: Vec<f64> = rf.values[cfg.fault_onset..]
            .iter()
            .zip(&r0.values[cfg.fault_onset..])
            .map(|(a, b)| a - b)
            .collect();
        let phi_f = estimate_spectrum(&fault_part, &grid)?;
        let phi_d = estimate_spectrum(r0.settled(), &grid)?;
        let j_freq = perf_index_freq(&phi_f, &phi_d)?;
        let (omega0, j_opt) = optimal_frequency(&phi_f, &phi_d)?;
        let _ = writeln!(out, "{},{j_time},{j_freq},{omega0},{j_opt}", spec.name);
    }
    let path = artifact_path(common, output)?;
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_mc(common: &Common, output: &Path, serial: bool) -> Result<()> {
    let cfg: ExperimentConfig = load_config(&common.config, &common.overrides)?;
    let registry = DetectorRegistry::with_builtins();
    let exp = Experiment::new(cfg, &registry)?;
    let report = exp.run_monte_carlo_with(&registry, !serial)?;

    let report_path = artifact_path(common, output)?;
    emit_report(&report, &report_path)?;
    let per_run_path = report_path.with_file_name("per_run.csv");
    emit_per_run(&report, &per_run_path)?;
    dump_method_artifacts(common, &exp, &registry)?;

    println!(
        "{} runs in {:.1}s (config {})",
        report.runs, report.elapsed_secs, report.config_hash
    );
    for row in &report.rows {
        let mt2d = row
            .mt2d
            .map(|v| format!("{v:.2}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "  {:<12} FDR {:6.2}%  FAR {:5.2}%  MT2D {:>8}  detected {}/{}",
            row.method, row.fdr_pct, row.far_pct, mt2d, row.detected, report.runs
        );
    }
    println!("wrote {} and {}", report_path.display(), per_run_path.display());
    Ok(())
}

/// Per-method plot data: frequency responses of the plant transfer functions
/// and post-filter, plus residual/evaluation traces of replication 0.
fn dump_method_artifacts(
    common: &Common,
    exp: &Experiment,
    registry: &DetectorRegistry,
) -> Result<()> {
    let artifacts = exp.artifacts();
    let (training0, test0) = exp.realize(0)?;
    let grid = default_grid();
    for spec in &exp.config().methods {
        let mut det = registry.build(spec, artifacts)?;
        det.fit(&training0)?;

        let mut resp = String::from("omega,plant_gain,shaping_gain,filter_gain\n");
        for &w in &grid {
            let filter_gain = det
                .filter()
                .map(|f| f.tf.gain_at(w).to_string())
                .unwrap_or_default();
            let _ = writeln!(
                resp,
                "{w},{},{},{filter_gain}",
                artifacts.g.gain_at(w),
                artifacts.h.gain_at(w)
            );
        }
        let resp_path = artifact_path(common, Path::new(&format!("response_{}.csv", slug(&spec.name))))?;
        write_text(&resp_path, &resp)?;

        let residual = det.residual(&test0)?;
        let (evals, th) = det.evaluate(&test0)?;
        let mut trace = String::from("t,residual,eval,threshold\n");
        for t in 0..residual.len() {
            let eval = if t >= evals.start {
                evals.values[t - evals.start].to_string()
            } else {
                String::new()
            };
            let _ = writeln!(trace, "{t},{},{eval},{}", residual.values[t], th.value);
        }
        let trace_path = artifact_path(common, Path::new(&format!("trace_{}.csv", slug(&spec.name))))?;
        write_text(&trace_path, &trace)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct EvalDatasetConfig {
    model: ModelConfig,
    methods: Vec<fdkit::detect::MethodSpec>,
    fault_onset: usize,
}

pub fn cmd_eval_dataset(common: &Common, train: &Path, test: &Path, output: &Path) -> Result<()> {
    let cfg: EvalDatasetConfig = load_config(&common.config, &common.overrides)?;
    let model = cfg.model.to_model()?;
    let training = SimulationRecord::read_csv(train, 0)?;
    let test_record = SimulationRecord::read_csv(test, cfg.fault_onset)?;
    let registry = DetectorRegistry::with_builtins();
    let evaluated = evaluate_dataset(&model, &cfg.methods, &registry, &training, &test_record)?;

    let mut out = String::from("method,FDR,FAR,MT2D,detected\n");
    for d in &evaluated {
        let mt2d = d.outcome.mt2d.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{mt2d},{}",
            d.method, d.outcome.fdr, d.outcome.far, d.outcome.detected
        );
    }
    let path = artifact_path(common, output)?;
    write_text(&path, &out)?;

    for d in &evaluated {
        let mut trace = String::from("t,eval,threshold,alarm\n");
        for (i, v) in d.evals.values.iter().enumerate() {
            let t = d.evals.start + i;
            let _ = writeln!(
                trace,
                "{t},{v},{},{}",
                d.threshold.value,
                u8::from(*v >= d.threshold.value)
            );
        }
        let trace_path =
            artifact_path(common, Path::new(&format!("eval_trace_{}.csv", slug(&d.method))))?;
        write_text(&trace_path, &trace)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

/// Re-aggregates a long-form per-run CSV into the fixed report table, using
/// the config for method order and metadata.
pub fn cmd_report(common: &Common, input: &Path, output: &Path) -> Result<()> {
    let cfg: ExperimentConfig = load_config(&common.config, &common.overrides)?;
    let text = std::fs::read_to_string(input).map_err(|e| FdError::Io {
        path: input.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "run,method,FDR,FAR,MT2D,detected")) => {}
        _ => {
            return Err(FdError::Ingestion {
                row: 0,
                message: "expected header run,method,FDR,FAR,MT2D,detected".into(),
            })
        }
    }
    struct Acc {
        fdr: f64,
        far: f64,
        mt2d: f64,
        detected: usize,
        n: usize,
    }
    let mut by_method: std::collections::BTreeMap<String, Acc> = Default::default();
    for (idx, line) in lines {
        let row = idx + 1;
        let bad = |message: &str| FdError::Ingestion {
            row,
            message: message.into(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad("expected 6 columns"));
        }
        let fdr: f64 = fields[2].parse().map_err(|_| bad("bad FDR cell"))?;
        let far: f64 = fields[3].parse().map_err(|_| bad("bad FAR cell"))?;
        let detected = match fields[5] {
            "true" => true,
            "false" => false,
            _ => return Err(bad("bad detected cell")),
        };
        let mt2d: f64 = if fields[4].is_empty() {
            0.0
        } else {
            fields[4].parse().map_err(|_| bad("bad MT2D cell"))?
        };
        let acc = by_method.entry(fields[1].to_string()).or_insert(Acc {
            fdr: 0.0,
            far: 0.0,
            mt2d: 0.0,
            detected: 0,
            n: 0,
        });
        acc.fdr += fdr;
        acc.far += far;
        acc.mt2d += mt2d;
        acc.detected += usize::from(detected);
        acc.n += 1;
    }
    let mut out = String::from("method,s,alpha,FDR_pct,FAR_pct,MT2D,detected\n");
    for spec in &cfg.methods {
        let acc = by_method.get(&spec.name).ok_or_else(|| FdError::Ingestion {
            row: 0,
            message: format!("method '{}' absent from {}", spec.name, input.display()),
        })?;
        let n = acc.n as f64;
        let s = spec.s.map(|v| v.to_string()).unwrap_or_default();
        let mt2d = if acc.detected > 0 {
            (acc.mt2d / acc.detected as f64).to_string()
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{s},{},{},{},{mt2d},{}",
            spec.name,
            spec.alpha,
            100.0 * acc.fdr / n,
            100.0 * acc.far / n,
            acc.detected
        );
    }
    let path = artifact_path(common, output)?;
    write_text(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(())
}
