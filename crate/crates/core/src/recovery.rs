//! Recovering a layer input `x` from its output `q = f(Mx)` given the model.
//!
//! Two constructions:
//!
//! * [`recover_linear`]: back-project `z = Mᵀq`, project `z` onto each
//!   component subspace, normalize, and keep the candidate that maximizes
//!   `⟨q, f(M x̂_j)⟩`. For the identity activation the per-component candidate
//!   is the least-squares solution instead, which is exact on noiseless data.
//! * [`recover_iterative`]: projected gradient descent on
//!   `½‖f(Mz) − q‖²` inside the selected component, renormalizing to the
//!   sphere after every step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::models::{sample_points, ManifoldModel};
use crate::netsim::{make_layer, ActivationKind, ActivationSpec, RandomLayer};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    Linear,
    IterativeProjected,
}

impl RecoveryMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RecoveryMethod::Linear => "linear",
            RecoveryMethod::IterativeProjected => "iterative_projected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub estimate: Vec<f64>,
    pub component_index: usize,
    /// `‖f(M x̂) − q‖₂`
    pub residual: f64,
    /// `‖x − x̂‖₂` when the ground truth is known.
    pub error: Option<f64>,
    pub iterations: usize,
    pub method: RecoveryMethod,
}

impl RecoveryResult {
    /// Fills in `error` against the true input. For one-dimensional components
    /// the sign of `x` is not identifiable in general, so `min(‖x−x̂‖, ‖x+x̂‖)` is used.
    pub fn with_truth(mut self, x: &[f64], model: &ManifoldModel) -> Self {
        self.error = Some(recovery_error(x, &self.estimate, model.intrinsic_dim()));
        self
    }
}

pub fn recovery_error(x: &[f64], estimate: &[f64], intrinsic_dim: usize) -> f64 {
    let direct = linalg::distance(x, estimate);
    if intrinsic_dim == 1 {
        let flipped = x.iter().zip(estimate).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        direct.min(flipped)
    } else {
        direct
    }
}

fn residual(layer: &RandomLayer, x: &[f64], q: &[f64]) -> Result<f64> {
    Ok(linalg::distance(&layer.apply(x)?, q))
}

fn check_observation(layer: &RandomLayer, q: &[f64], model: &ManifoldModel) -> Result<()> {
    if q.len() != layer.out_dim() {
        return Err(Error::Parameter(format!(
            "observation has length {}, layer output is {}",
            q.len(),
            layer.out_dim()
        )));
    }
    if model.bases().is_empty() {
        return Err(Error::Parameter("recovery needs a model with stored component bases".into()));
    }
    if model.ambient_dim() != layer.in_dim() {
        return Err(Error::Parameter(format!(
            "model dimension {} does not match layer input {}",
            model.ambient_dim(),
            layer.in_dim()
        )));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("observation has non-finite entries".into()));
    }
    Ok(())
}

/// Least-squares solution of `M B c ≈ q`, mapped back to `normalize(B c)`.
fn subspace_least_squares(layer: &RandomLayer, basis: &Matrix, q: &[f64]) -> Option<Vec<f64>> {
    let a = layer.matrix().matmul(basis);
    let c = linalg::least_squares(&a, q).ok()?;
    linalg::normalized(&basis.matvec(&c))
}

pub fn recover_linear(layer: &RandomLayer, q: &[f64], model: &ManifoldModel) -> Result<RecoveryResult> {
    check_observation(layer, q, model)?;
    let z = layer.matrix().matvec_t(q);
    let exact = layer.activation().kind == ActivationKind::Identity;

    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for j in 0..model.components() {
        let basis = model.component_span(j)?;
        let candidate = if exact {
            subspace_least_squares(layer, &basis, q)
        } else {
            linalg::normalized(&basis.matvec(&basis.matvec_t(&z)))
        };
        let Some(x) = candidate else { continue };
        let score = linalg::dot(q, &layer.apply(&x)?);
        // strict comparison keeps the lowest index on ties
        if best.as_ref().map_or(true, |(_, _, s)| score > *s) {
            best = Some((j, x, score));
        }
    }
    let (component_index, estimate, _) = best.ok_or_else(|| {
        Error::DegenerateObservation("back-projection vanishes on every component".into())
    })?;
    Ok(RecoveryResult {
        residual: residual(layer, &estimate, q)?,
        estimate,
        component_index,
        error: None,
        iterations: 0,
        method: RecoveryMethod::Linear,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeOptions {
    pub max_iter: usize,
    /// Defaults to `1/λ_max(MᵀM)` from 20 power iterations.
    pub step: Option<f64>,
    pub tol: f64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            step: None,
            tol: 1e-12,
        }
    }
}

pub fn default_step(layer: &RandomLayer) -> f64 {
    1.0 / layer.matrix().spectral_norm_sq(20)
}

pub fn recover_iterative(
    layer: &RandomLayer,
    q: &[f64],
    model: &ManifoldModel,
    init: &RecoveryResult,
    opts: IterativeOptions,
) -> Result<RecoveryResult> {
    check_observation(layer, q, model)?;
    if opts.max_iter == 0 {
        return Err(Error::Parameter("max_iter must be >= 1".into()));
    }
    if !(opts.tol >= 0.0) {
        return Err(Error::Parameter("tol must be >= 0".into()));
    }
    if init.component_index >= model.components() || init.estimate.len() != layer.in_dim() {
        return Err(Error::Parameter("initialization does not match model/layer".into()));
    }
    let unchanged = |iterations: usize| RecoveryResult {
        method: RecoveryMethod::IterativeProjected,
        iterations,
        ..init.clone()
    };
    if init.residual == 0.0 {
        return Ok(unchanged(0));
    }
    let basis = model.component_span(init.component_index)?;
    let activation: ActivationSpec = *layer.activation();

    if activation.kind == ActivationKind::Identity {
        // quadratic objective on the subspace: one least-squares solve is optimal
        if let Some(x) = subspace_least_squares(layer, &basis, q) {
            let r = residual(layer, &x, q)?;
            if r < init.residual {
                return Ok(RecoveryResult {
                    estimate: x,
                    residual: r,
                    iterations: 1,
                    ..unchanged(1)
                });
            }
        }
        return Ok(unchanged(1));
    }

    let step = match opts.step {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::Parameter(format!("step must be positive, got {s}"))),
        None => default_step(layer),
    };
    let a = layer.matrix().matmul(&basis);
    let mut c = basis.matvec_t(&init.estimate);
    let mut current = init.residual;
    let mut best = (c.clone(), current);
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let u = a.matvec(&c);
        let weighted: Vec<f64> = u
            .iter()
            .zip(q)
            .map(|(&ui, &qi)| activation.derivative(ui) * (activation.eval(ui) - qi))
            .collect();
        let grad = a.matvec_t(&weighted);
        linalg::axpy(-step, &grad, &mut c);
        c = linalg::normalized(&c)
            .ok_or_else(|| Error::NumericalFailure("iterate collapsed to zero".into()))?;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite iterate".into()));
        }
        let u = a.matvec(&c);
        let r = u
            .iter()
            .zip(q)
            .map(|(&ui, &qi)| (activation.eval(ui) - qi).powi(2))
            .sum::<f64>()
            .sqrt();
        if !r.is_finite() {
            return Err(Error::NumericalFailure("non-finite residual".into()));
        }
        if r < best.1 {
            best = (c.clone(), r);
        }
        let improvement = current - r;
        current = r;
        if improvement < opts.tol || r == 0.0 {
            break;
        }
    }
    if best.1 >= init.residual {
        return Ok(unchanged(iterations));
    }
    let estimate = linalg::normalized(&basis.matvec(&best.0))
        .ok_or_else(|| Error::NumericalFailure("estimate collapsed to zero".into()))?;
    Ok(RecoveryResult {
        residual: residual(layer, &estimate, q)?,
        estimate,
        component_index: init.component_index,
        error: None,
        iterations,
        method: RecoveryMethod::IterativeProjected,
    })
}

/// One recovery attempt in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub trial: usize,
    pub method: RecoveryMethod,
    pub residual: f64,
    pub error: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: RecoveryMethod,
    /// `(m, median error)` in `m_list` order.
    pub medians: Vec<(usize, f64)>,
    /// Log-log regression slope of median error against `m`; `None` when a
    /// median sits at the numerical floor.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<MethodSummary>,
}

impl SweepTable {
    pub fn summary(&self, method: RecoveryMethod) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub activation: ActivationSpec,
    /// Run the iterative refinement after the linear estimate.
    pub iterative: Option<IterativeOptions>,
}

/// Medians at or below this are treated as exact recovery.
pub const ERROR_FLOOR: f64 = 1e-10;

/// Seed of the layer used in `trial`; shared by every `m` so wider layers extend narrower ones.
pub fn trial_layer_seed(master: u64, trial: usize) -> u64 {
    rng::derive_seed(master, 2 * trial as u64)
}

/// Seed of the input point drawn in `trial`; shared by every `m`.
pub fn trial_point_seed(master: u64, trial: usize) -> u64 {
    rng::derive_seed(master, 2 * trial as u64 + 1)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, y)| y <= ERROR_FLOOR) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| (x as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Median recovery error per `m`, with fresh layers and inputs per trial.
pub fn recovery_error_sweep(
    model: &ManifoldModel,
    master_seed: u64,
    m_list: &[usize],
    trials: usize,
    opts: SweepOptions,
) -> Result<SweepTable> {
    if m_list.len() < 3 {
        return Err(Error::Parameter("m_list needs at least 3 values".into()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) || m_list[0] == 0 {
        return Err(Error::Parameter("m_list must be positive and strictly ascending".into()));
    }
    if (m_list[m_list.len() - 1] as f64) < 10.0 * m_list[0] as f64 {
        return Err(Error::Parameter("m_list must span at least one decade".into()));
    }
    if trials < 10 {
        return Err(Error::Parameter(format!("trials must be >= 10, got {trials}")));
    }
    let n = model.ambient_dim();
    let jobs: Vec<(usize, usize)> = m_list
        .iter()
        .flat_map(|&m| (0..trials).map(move |t| (m, t)))
        .collect();
    let per_job: Vec<Vec<SweepRow>> = jobs
        .par_iter()
        .map(|&(m, trial)| {
            let layer = make_layer(n, m, opts.activation, trial_layer_seed(master_seed, trial))?;
            let x = sample_points(model, 1, trial_point_seed(master_seed, trial))?.into_points().remove(0);
            let q = layer.apply(&x)?;
            let lin = recover_linear(&layer, &q, model)?.with_truth(&x, model);
            let mut rows = vec![SweepRow {
                m,
                trial,
                method: RecoveryMethod::Linear,
                residual: lin.residual,
                error: lin.error.unwrap_or(f64::NAN),
                iterations: lin.iterations,
            }];
            if let Some(it) = opts.iterative {
                let refined = recover_iterative(&layer, &q, model, &lin, it)?.with_truth(&x, model);
                rows.push(SweepRow {
                    m,
                    trial,
                    method: RecoveryMethod::IterativeProjected,
                    residual: refined.residual,
                    error: refined.error.unwrap_or(f64::NAN),
                    iterations: refined.iterations,
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = per_job.into_iter().flatten().collect();

    let mut methods = vec![RecoveryMethod::Linear];
    if opts.iterative.is_some() {
        methods.push(RecoveryMethod::IterativeProjected);
    }
    let summaries = methods
        .into_iter()
        .map(|method| {
            let medians: Vec<(usize, f64)> = m_list
                .iter()
                .map(|&m| {
                    let mut errs: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.m == m && r.method == method)
                        .map(|r| r.error)
                        .collect();
                    (m, median(&mut errs))
                })
                .collect();
            MethodSummary {
                method,
                slope: loglog_slope(&medians),
                medians,
            }
        })
        .collect();
    Ok(SweepTable { rows, summaries })
}
