//! `fdkit` command-line front end.
//!
//! Every subcommand reads a JSON-with-comments config, applies `--set`
//! overrides, and writes CSV artifacts into the output directory. Exit codes:
//! 0 success, 1 computational failure, 2 configuration/ingestion error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdkit::error::FdError;

#[derive(Parser)]
#[command(name = "fdkit", version, about = "Fault-detection benchmarking toolkit for LTI stochastic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON config (comments with // and /* */ are allowed).
    #[arg(short, long)]
    config: PathBuf,

    /// Directory for output artifacts.
    #[arg(short, long, env = "FDKIT_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,

    /// Config overrides as dotted key=value pairs, applied after parsing
    /// (e.g. --set runs=50 --set methods.0.alpha=0.95).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the plant's Riccati equation and print the Kalman gain,
    /// innovation variance and error covariance.
    Dare {
        #[command(flatten)]
        common: Common,
        /// Output CSV (relative paths resolve against --output-dir).
        #[arg(long, default_value = "dare.csv")]
        output: PathBuf,
    },
    /// Simulate one noise realization of the configured experiment and export
    /// it as a t,u,y,f CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "simulation.csv")]
        output: PathBuf,
        /// Replication index whose substreams are used.
        #[arg(long, default_value_t = 0)]
        run: usize,
        /// Export the fault-free training realization instead of the faulty
        /// test realization.
        #[arg(long)]
        training: bool,
    },
    /// Design the configured Butterworth post-filter and dump its
    /// coefficients and frequency response.
    DesignFilter {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "filter.csv")]
        output: PathBuf,
    },
    /// Compute time- and frequency-domain performance indices for every
    /// configured method on one realization.
    PerfIndex {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "perf_index.csv")]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Run the Monte Carlo campaign: aggregated report, per-run indicators,
    /// and per-method frequency-response and residual-trace dumps.
    Mc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "report.csv")]
        output: PathBuf,
        /// Run replications serially instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Evaluate the configured methods on external t,u,y CSV datasets.
    EvalDataset {
        #[command(flatten)]
        common: Common,
        /// Fault-free training dataset (t,u,y[,f] CSV).
        #[arg(long)]
        train: PathBuf,
        /// Test dataset with a fault at the configured onset.
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value = "indicators.csv")]
        output: PathBuf,
    },
    /// Aggregate a per-run indicator CSV into a report table.
    Report {
        #[command(flatten)]
        common: Common,
        /// Per-run CSV produced by the mc subcommand.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "report.csv")]
        output: PathBuf,
    },
}

fn exit_code_for(err: &FdError) -> u8 {
    match err {
        FdError::Config(_) | FdError::Ingestion { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Dare { common, output } => commands::cmd_dare(&common, &output),
        Command::Simulate {
            common,
            output,
            run,
            training,
        } => commands::cmd_simulate(&common, &output, run, training),
        Command::DesignFilter { common, output } => commands::cmd_design_filter(&common, &output),
        Command::PerfIndex {
            common,
            output,
            run,
        } => commands::cmd_perf_index(&common, &output, run),
        Command::Mc {
            common,
            output,
            serial,
        } => commands::cmd_mc(&common, &output, serial),
        Command::EvalDataset {
            common,
            train,
            test,
            output,
        } => commands::cmd_eval_dataset(&common, &train, &test, &output),
        Command::Report {
            common,
            input,
            output,
        } => commands::cmd_report(&common, &input, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
