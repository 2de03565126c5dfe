//! `gaussnet` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config error, 3 numerical degeneracy.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, ExperimentKind};
use super::experiments::run_experiment;
use super::plotdata::{emit_plotdata, PlotStatus};
use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "gaussnet", version, about = "Random Gaussian layer embedding experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML experiment config; defaults apply to missing sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config; default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo mean width plus closed-form bounds.
    Meanwidth(Common),
    /// Distortion of pairwise distances through random layers.
    Embed(Common),
    /// Input recovery error versus layer width.
    Recover(Common),
    /// Greedy-net covering numbers before and after each layer.
    Covering(Common),
    /// Width bound and the resulting net-size estimate.
    Samplesize(Common),
    /// Every experiment above.
    Sweep(Common),
    /// Extract an (x, y, group) table from an experiment CSV.
    Plotdata {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        group: String,
        /// Destination (default `<csv stem>.plot.csv` next to the input).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Parameter(_) => 2,
        e if e.is_numerical() => 3,
        _ => 1,
    }
}

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_path(p).map_err(|e| match e {
            Error::Io(io) => Error::config("--config", format!("{}: {io}", p.display())),
            other => other,
        })?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment.kind = kind;
    if let Some(s) = common.seed {
        cfg.experiment.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.experiment.out = Some(o.clone());
    }
    if let Some(r) = common.replicates {
        cfg.experiment.replicates = r;
    }
    if let Some(t) = common.threads {
        cfg.experiment.threads = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (common, kind) = match cli.command {
        Command::Plotdata {
            csv,
            x,
            y,
            group,
            out,
            quiet,
        } => {
            let out = out.unwrap_or_else(|| {
                let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                csv.with_file_name(format!("{stem}.plot.csv"))
            });
            return match emit_plotdata(&csv, &x, &y, &group, &out) {
                Ok(PlotStatus::Written { rows }) => {
                    if !quiet {
                        eprintln!("wrote {rows} rows to {}", out.display());
                    }
                    0
                }
                Ok(PlotStatus::EmptyInput) => {
                    eprintln!("warning: {} has no data rows; wrote header only", csv.display());
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            };
        }
        Command::Meanwidth(c) => (c, ExperimentKind::MeanWidth),
        Command::Embed(c) => (c, ExperimentKind::Embedding),
        Command::Recover(c) => (c, ExperimentKind::Recovery),
        Command::Covering(c) => (c, ExperimentKind::Covering),
        Command::Samplesize(c) => (c, ExperimentKind::SampleSize),
        Command::Sweep(c) => (c, ExperimentKind::FullSweep),
    };
    let result = load(&common, kind).and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(summary) => {
            if !common.quiet {
                for f in &summary.files {
                    eprintln!("wrote {}", f.display());
                }
                eprintln!("config hash {} ({:.2}s)", summary.config_hash, summary.wall_time_s);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
