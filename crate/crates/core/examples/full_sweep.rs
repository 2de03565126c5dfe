//! Runs every experiment from a TOML config and extracts a plot table,
//! the same path the `gaussnet sweep` and `gaussnet plotdata` commands take.
//!
//!     cargo run --release --example full_sweep [out_dir]

use std::path::PathBuf;

use gaussnet::harness::{emit_plotdata, run_experiment, ExperimentConfig};
use gaussnet::Result;

const CONFIG: &str = r#"
[experiment]
kind = "full_sweep"
seed = 42
replicates = 2

[model]
n = 64
k = 3
L = 3
points = 100

[layers]
m_list = [32, 128, 512]

[recovery]
m_list = [32, 128, 512]
trials = 10
"#;

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out/full_sweep"));
    let mut cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    cfg.experiment.out = Some(out.clone());
    let summary = run_experiment(&cfg)?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    println!("config hash {}", summary.config_hash);
    let plot = out.join("distortion.plot.csv");
    let status = emit_plotdata(&out.join("distortion.csv"), "m", "spearman", "replicate", &plot)?;
    println!("{status:?} -> {}", plot.display());
    Ok(())
}
