//! Config-driven experiments, CSV artifacts and the command line.

pub mod cli;
pub mod config;
pub mod csvout;
pub mod experiments;
pub mod plotdata;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run_experiment, RunSummary};
pub use plotdata::{emit_plotdata, PlotStatus};
