//! Experiment runners. Each writes one CSV into the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::csvout::{fmt_f64, Table};
use crate::error::{Error, Result};
use crate::metrics::{distortion_report, verify_covering_recursion};
use crate::models::{sample_points, ManifoldModel, PointCloud};
use crate::netsim::{build_stack, forward_stack, make_layer, RandomLayer};
use crate::recovery::{recovery_error_sweep, SweepOptions};
use crate::rng::derive_seed;
use crate::width::{
    covering_number_gmm, dudley_bound, estimate_mean_width, gmm_covering_fn, mean_width_gmm_bound,
    sudakov_net_size,
};

pub const MEAN_WIDTH_CSV: &str = "mean_width.csv";
pub const DISTORTION_CSV: &str = "distortion.csv";
pub const RECOVERY_CSV: &str = "recovery.csv";
pub const COVERING_CSV: &str = "covering.csv";
pub const SAMPLE_SIZE_CSV: &str = "sample_size.csv";
pub const MANIFEST: &str = "manifest.toml";

/// Seed of replicate `r`.
pub fn replicate_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, r as u64)
}

fn cloud_seed(replicate: u64) -> u64 {
    derive_seed(replicate, 0)
}

fn layer_seed(replicate: u64, layer: usize) -> u64 {
    derive_seed(replicate, 1 + layer as u64)
}

fn probe_seed(replicate: u64) -> u64 {
    derive_seed(replicate, 0xFFFF)
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub config_hash: String,
    pub wall_time_s: f64,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    model: ManifoldModel,
    hash: String,
    out: PathBuf,
}

impl Ctx<'_> {
    fn tag(&self) -> [String; 2] {
        [self.cfg.experiment.seed.to_string(), self.hash.clone()]
    }

    fn write(&self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.out.join(name);
        table.write(&path)?;
        Ok(path)
    }

    fn cloud(&self, replicate: u64) -> Result<PointCloud> {
        sample_points(&self.model, self.cfg.model.points, cloud_seed(replicate))
    }

    /// Layers for one `m` (first `n → m`, then `m → m`), or the explicit stack.
    fn layers(&self, m: usize, replicate: u64) -> Result<Vec<RandomLayer>> {
        if !self.cfg.stack.is_empty() {
            return build_stack(&self.cfg.stack);
        }
        let act = self.cfg.layers.activation_spec();
        (0..self.cfg.layers.depth)
            .map(|l| {
                let n_in = if l == 0 { self.cfg.model.n } else { m };
                make_layer(n_in, m, act, layer_seed(replicate, l))
            })
            .collect()
    }

    fn m_values(&self) -> Vec<usize> {
        if self.cfg.stack.is_empty() {
            self.cfg.layers.m_list.clone()
        } else {
            vec![self.cfg.stack.last().expect("nonempty").m]
        }
    }
}

fn mean_width(ctx: &Ctx) -> Result<PathBuf> {
    let cfg = ctx.cfg;
    let (n, k, l) = (cfg.model.n, cfg.model.k, cfg.model.components);
    let w = &cfg.width;
    let mut t = Table::new(&["quantity", "params", "value", "std_error", "master_seed", "config_hash"]);
    for r in 0..cfg.experiment.replicates {
        let rs = replicate_seed(cfg.experiment.seed, r);
        let cloud = ctx.cloud(rs)?;
        let est = estimate_mean_width(cloud.points(), w.probes, probe_seed(rs))?;
        let params = format!(
            "n={n};k={k};L={l};points={};probes={};replicate={r};seed={rs}",
            cfg.model.points, w.probes
        );
        t.push(
            [
                "mean_width_estimate".to_string(),
                params,
                fmt_f64(est.value),
                fmt_f64(est.std_error),
            ]
            .into_iter()
            .chain(ctx.tag()),
        );
    }
    let exact = |t: &mut Table, q: &str, params: String, v: f64| {
        t.push([q.to_string(), params, fmt_f64(v), fmt_f64(0.0)].into_iter().chain(ctx.tag()));
    };
    let c = w.constant;
    exact(
        &mut t,
        "mean_width_gmm_bound",
        format!("k={k};L={l};constant={c}"),
        mean_width_gmm_bound(k, l, c)?,
    );
    exact(
        &mut t,
        "covering_number_gmm",
        format!("k={k};L={l};eps={}", w.eps),
        covering_number_gmm(l, k, w.eps)?.value,
    );
    exact(
        &mut t,
        "dudley_bound",
        format!("k={k};L={l};radius_max={};constant={c}", w.radius_max),
        dudley_bound(gmm_covering_fn(l, k), w.radius_max, c)?,
    );
    ctx.write(MEAN_WIDTH_CSV, &t)
}

fn embedding(ctx: &Ctx) -> Result<PathBuf> {
    let cfg = ctx.cfg;
    let mut t = Table::new(&[
        "seed", "replicate", "n", "m", "k", "L", "layer", "metric_pre", "metric_post", "pairs", "scale_constant",
        "max_residual", "mean_residual", "spearman", "master_seed", "config_hash",
    ]);
    for r in 0..cfg.experiment.replicates {
        let rs = replicate_seed(cfg.experiment.seed, r);
        let cloud = ctx.cloud(rs)?;
        for m in ctx.m_values() {
            let layers = ctx.layers(m, rs)?;
            let stages = forward_stack(&layers, cloud.points(), cfg.layers.renormalize)?;
            for (li, layer) in layers.iter().enumerate() {
                let input = &stages[li].points;
                let raw = layer.apply_all(input)?;
                let rep = distortion_report(input, &raw, cfg.metrics.pre, cfg.metrics.post)?;
                t.push(
                    [
                        rs.to_string(),
                        r.to_string(),
                        layer.in_dim().to_string(),
                        layer.out_dim().to_string(),
                        cfg.model.k.to_string(),
                        cfg.model.components.to_string(),
                        (li + 1).to_string(),
                        rep.pre_metric.name().to_string(),
                        rep.post_metric.name().to_string(),
                        rep.pairs.to_string(),
                        fmt_f64(rep.scale_constant),
                        fmt_f64(rep.max_residual),
                        fmt_f64(rep.mean_residual),
                        fmt_f64(rep.spearman),
                    ]
                    .into_iter()
                    .chain(ctx.tag()),
                );
            }
        }
    }
    ctx.write(DISTORTION_CSV, &t)
}

fn recovery(ctx: &Ctx) -> Result<PathBuf> {
    let cfg = ctx.cfg;
    let rc = &cfg.recovery;
    let mut t = Table::new(&[
        "replicate", "m", "trial", "method", "residual", "error", "iterations", "slope", "row_kind", "master_seed",
        "config_hash",
    ]);
    let opts = SweepOptions {
        activation: cfg.layers.activation_spec(),
        iterative: rc.iterative_options(),
    };
    for r in 0..cfg.experiment.replicates {
        let rs = replicate_seed(cfg.experiment.seed, r);
        let sweep = recovery_error_sweep(&ctx.model, rs, &rc.m_list, rc.trials, opts)?;
        for row in &sweep.rows {
            t.push(
                [
                    r.to_string(),
                    row.m.to_string(),
                    row.trial.to_string(),
                    row.method.name().to_string(),
                    fmt_f64(row.residual),
                    fmt_f64(row.error),
                    row.iterations.to_string(),
                    String::new(),
                    "trial".to_string(),
                ]
                .into_iter()
                .chain(ctx.tag()),
            );
        }
        for s in &sweep.summaries {
            for &(m, med) in &s.medians {
                t.push(
                    [
                        r.to_string(),
                        m.to_string(),
                        String::new(),
                        s.method.name().to_string(),
                        String::new(),
                        fmt_f64(med),
                        String::new(),
                        String::new(),
                        "median".to_string(),
                    ]
                    .into_iter()
                    .chain(ctx.tag()),
                );
            }
            t.push(
                [
                    r.to_string(),
                    String::new(),
                    String::new(),
                    s.method.name().to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    s.slope.map_or_else(|| "floor".to_string(), fmt_f64),
                    "slope".to_string(),
                ]
                .into_iter()
                .chain(ctx.tag()),
            );
        }
    }
    ctx.write(RECOVERY_CSV, &t)
}

fn covering(ctx: &Ctx) -> Result<PathBuf> {
    let cfg = ctx.cfg;
    let mut t = Table::new(&[
        "seed", "replicate", "layer", "m", "eps", "width_est", "shrunk_radius", "net_size_pre", "net_size_post",
        "bound_rhs", "pass", "master_seed", "config_hash",
    ]);
    for r in 0..cfg.experiment.replicates {
        let rs = replicate_seed(cfg.experiment.seed, r);
        let cloud = ctx.cloud(rs)?;
        for m in ctx.m_values() {
            let layers = ctx.layers(m, rs)?;
            let stages = forward_stack(&layers, cloud.points(), cfg.layers.renormalize)?;
            for (li, layer) in layers.iter().enumerate() {
                let input = &stages[li].points;
                let raw = layer.apply_all(input)?;
                let width = estimate_mean_width(input, cfg.width.probes, probe_seed(rs))?.value;
                for &eps in &cfg.covering.eps_list {
                    let c = verify_covering_recursion(input, &raw, eps, width, layer.out_dim(), cfg.covering.slack)?;
                    t.push(
                        [
                            rs.to_string(),
                            r.to_string(),
                            (li + 1).to_string(),
                            layer.out_dim().to_string(),
                            fmt_f64(eps),
                            fmt_f64(width),
                            fmt_f64(c.shrunk_radius),
                            c.net_size_pre.to_string(),
                            c.net_size_post.to_string(),
                            fmt_f64(c.bound_rhs),
                            c.pass.to_string(),
                        ]
                        .into_iter()
                        .chain(ctx.tag()),
                    );
                }
            }
        }
    }
    ctx.write(COVERING_CSV, &t)
}

fn sample_size(ctx: &Ctx) -> Result<PathBuf> {
    let cfg = ctx.cfg;
    let (k, l) = (cfg.model.k, cfg.model.components);
    let (eps, c) = (cfg.width.eps, cfg.width.constant);
    let bound = mean_width_gmm_bound(k, l, c)?;
    let net = sudakov_net_size(bound, eps, 1.0)?;
    let mut t = Table::new(&[
        "k", "L", "eps", "constant", "mean_width_gmm_bound", "sudakov_net_size", "master_seed", "config_hash",
    ]);
    t.push(
        [
            k.to_string(),
            l.to_string(),
            fmt_f64(eps),
            fmt_f64(c),
            fmt_f64(bound),
            fmt_f64(net),
        ]
        .into_iter()
        .chain(ctx.tag()),
    );
    ctx.write(SAMPLE_SIZE_CSV, &t)
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: ExperimentKind,
    library_version: &'a str,
    config_hash: &'a str,
    wall_time_s: f64,
    files: Vec<String>,
    config: &'a ExperimentConfig,
}

fn run_inner(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    fs::create_dir_all(out)?;
    let ctx = Ctx {
        cfg,
        model: cfg.model.model_config().build()?,
        hash: cfg.config_hash(),
        out: out.to_path_buf(),
    };
    let mut files = Vec::new();
    let kind = cfg.experiment.kind;
    let all = kind == ExperimentKind::FullSweep;
    if all || kind == ExperimentKind::MeanWidth {
        files.push(mean_width(&ctx)?);
    }
    if all || kind == ExperimentKind::Embedding {
        files.push(embedding(&ctx)?);
    }
    if all || kind == ExperimentKind::Recovery {
        files.push(recovery(&ctx)?);
    }
    if all || kind == ExperimentKind::Covering {
        files.push(covering(&ctx)?);
    }
    if all || kind == ExperimentKind::SampleSize {
        files.push(sample_size(&ctx)?);
    }
    let wall_time_s = started.elapsed().as_secs_f64();
    let manifest = Manifest {
        experiment: kind,
        library_version: env!("CARGO_PKG_VERSION"),
        config_hash: &ctx.hash,
        wall_time_s,
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        config: cfg,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::NumericalFailure(format!("manifest: {e}")))?;
    fs::write(out.join(MANIFEST), text)?;
    Ok(RunSummary {
        files,
        config_hash: ctx.hash,
        wall_time_s,
    })
}

/// Validates `cfg`, runs it and writes CSVs plus `manifest.toml` into the
/// configured output directory (default `out/`).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out = cfg.experiment.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match cfg.experiment.threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("experiment.threads", e.to_string()))?;
            pool.install(|| run_inner(cfg, &out))
        }
        _ => run_inner(cfg, &out),
    }
}
