use std::path::Path;
use std::process::Command;

use gaussnet::harness::csvout::Table;
use gaussnet::harness::{emit_plotdata, run_experiment, ExperimentConfig, ExperimentKind, PlotStatus};

fn small(kind: ExperimentKind, out: &Path) -> ExperimentConfig {
    let text = format!(
        r#"
[experiment]
kind = "{}"
seed = 11
replicates = 2
out = "{}"

[model]
n = 32
k = 2
L = 3
points = 40

[layers]
m_list = [16, 64, 256]

[width]
probes = 200

[recovery]
m_list = [32, 128, 512]
trials = 10
"#,
        kind_name(kind),
        out.display()
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::MeanWidth => "mean_width",
        ExperimentKind::Embedding => "embedding",
        ExperimentKind::Recovery => "recovery",
        ExperimentKind::Covering => "covering",
        ExperimentKind::SampleSize => "sample_size",
        ExperimentKind::FullSweep => "full_sweep",
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaussnet"))
}

#[test]
fn embedding_has_one_row_per_replicate_and_width() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Embedding, dir.path());
    cfg.experiment.replicates = 5;
    run_experiment(&cfg).unwrap();
    let t = Table::read(&dir.path().join("distortion.csv")).unwrap();
    assert_eq!(t.rows().len(), 5 * 3);
    let spearman = t.header().iter().position(|h| h == "spearman").unwrap();
    for r in t.rows() {
        let s: f64 = r[spearman].parse().unwrap();
        assert!((-1.0..=1.0).contains(&s));
    }
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn sample_size_is_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::SampleSize, dir.path())).unwrap();
    let t = Table::read(&dir.path().join("sample_size.csv")).unwrap();
    assert_eq!(t.rows().len(), 1);
    let col = |name: &str| -> f64 {
        let i = t.header().iter().position(|h| h == name).unwrap();
        t.rows()[0][i].parse().unwrap()
    };
    let w = col("mean_width_gmm_bound");
    assert!((w - (2.0 + 3f64.ln()).sqrt()).abs() < 1e-12);
    assert!(col("sudakov_net_size") >= 1.0);
}

#[test]
fn every_subcommand_writes_its_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    let out = dir.path().join("out");
    std::fs::write(&cfg_path, small(ExperimentKind::FullSweep, &out).to_toml_string()).unwrap();
    for (sub, file) in [
        ("meanwidth", "mean_width.csv"),
        ("embed", "distortion.csv"),
        ("recover", "recovery.csv"),
        ("covering", "covering.csv"),
        ("samplesize", "sample_size.csv"),
    ] {
        let status = bin()
            .args([sub, "--quiet", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(out.join(sub))
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "{sub}");
        assert!(out.join(sub).join(file).exists(), "{sub}");
    }
}

#[test]
fn k_larger_than_n_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(&cfg_path, "[model]\nn = 8\nk = 9\n").unwrap();
    let o = bin().args(["embed", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("model.k"), "{err}");
}

#[test]
fn unknown_key_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(&cfg_path, "[model]\nn = 8\nbogus = 1\n").unwrap();
    let o = bin().args(["meanwidth", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_config_file_exits_2() {
    let o = bin().args(["embed", "--config", "/nonexistent/cfg.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut ca = small(ExperimentKind::FullSweep, a.path());
    let mut cb = small(ExperimentKind::FullSweep, b.path());
    ca.experiment.threads = Some(1);
    cb.experiment.threads = Some(4);
    assert_eq!(ca.config_hash(), cb.config_hash());
    let sa = run_experiment(&ca).unwrap();
    run_experiment(&cb).unwrap();
    for f in &sa.files {
        let name = f.file_name().unwrap();
        if name == "manifest.toml" {
            continue;
        }
        assert_eq!(std::fs::read(f).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn seed_changes_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = small(ExperimentKind::Embedding, a.path());
    let mut cb = small(ExperimentKind::Embedding, b.path());
    cb.experiment.seed = 12;
    assert_ne!(ca.config_hash(), cb.config_hash());
    run_experiment(&ca).unwrap();
    run_experiment(&cb).unwrap();
    assert_ne!(
        std::fs::read(a.path().join("distortion.csv")).unwrap(),
        std::fs::read(b.path().join("distortion.csv")).unwrap()
    );
}

#[test]
fn plotdata_extracts_columns() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::Embedding, dir.path())).unwrap();
    let out = dir.path().join("plot.csv");
    let st = emit_plotdata(&dir.path().join("distortion.csv"), "m", "spearman", "replicate", &out).unwrap();
    assert_eq!(st, PlotStatus::Written { rows: 6 });
    let t = Table::read(&out).unwrap();
    assert_eq!(t.header(), ["x", "y", "group"]);
    assert_eq!(t.rows().len(), 6);
}

#[test]
fn plotdata_cli_rejects_unknown_field() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::SampleSize, dir.path())).unwrap();
    let o = bin()
        .args(["plotdata", "--x", "k", "--y", "nope", "--group", "L", "--csv"])
        .arg(dir.path().join("sample_size.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}
