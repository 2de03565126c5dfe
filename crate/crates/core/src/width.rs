//! Gaussian mean width: Monte Carlo estimation and closed-form bounds.
//!
//! The width of a set `K` is `ω(K) = E sup_{x,y∈K} ⟨g, x − y⟩` for standard
//! Gaussian `g`. For a finite cloud the inner sup is exact:
//! `max_x ⟨g, x⟩ − min_y ⟨g, y⟩`.
//!
//! The bound calculators take an explicit `constant` for the unspecified
//! absolute constants of the Dudley and Sudakov inequalities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanWidthEstimate {
    pub value: f64,
    pub std_error: f64,
    pub probes: usize,
    pub cloud_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoveringSource {
    GmmFormula,
    EmpiricalNet,
    LayerRecursion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringBound {
    pub radius: f64,
    pub value: f64,
    pub source: CoveringSource,
}

/// Width of the pair set for probe `t`, `max ⟨g_t, x⟩ − min ⟨g_t, x⟩`.
fn probe_sup(points: &[Vec<f64>], seed: u64, t: usize) -> f64 {
    let n = points[0].len();
    let base = (t as u64).wrapping_mul(n as u64);
    let g = rng::GaussianStream::with_offset(seed, streams::PROBE, base);
    let g: Vec<f64> = (0..n as u64).map(|j| g.at(j)).collect();
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for x in points {
        let v = crate::linalg::dot(&g, x);
        hi = hi.max(v);
        lo = lo.min(v);
    }
    hi - lo
}

/// Monte Carlo estimate of the mean width of a finite cloud.
///
/// Probe `t` uses Gaussian counters `t*n .. t*n + n` of `(seed, PROBE)`, so
/// two clouds estimated with the same seed see the same probe vectors. The
/// result is a lower bound on the width of any set containing the cloud.
pub fn estimate_mean_width(points: &[Vec<f64>], probes: usize, seed: u64) -> Result<MeanWidthEstimate> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "mean width needs at least 2 points, got {}",
            points.len()
        )));
    }
    if probes == 0 {
        return Err(Error::Parameter("probes must be >= 1".into()));
    }
    let n = points[0].len();
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::Parameter("points have mixed dimensions".into()));
    }
    let sups: Vec<f64> = (0..probes)
        .into_par_iter()
        .map(|t| probe_sup(points, seed, t))
        .collect();
    let pf = probes as f64;
    let mean = sups.iter().sum::<f64>() / pf;
    let std_error = if probes > 1 {
        let var = sups.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (pf - 1.0);
        (var / pf).sqrt()
    } else {
        0.0
    };
    Ok(MeanWidthEstimate {
        value: mean,
        std_error,
        probes,
        cloud_size: points.len(),
    })
}

/// `N(K, ε) = L (1 + 2/ε)^k` for `ε < 1`, else 1.
pub fn covering_number_gmm(l: usize, k: usize, eps: f64) -> Result<CoveringBound> {
    if l == 0 || k == 0 {
        return Err(Error::Parameter(format!("need L >= 1 and k >= 1 (L={l}, k={k})")));
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {eps}")));
    }
    let value = if eps < 1.0 {
        l as f64 * (1.0 + 2.0 / eps).powf(k as f64)
    } else {
        1.0
    };
    Ok(CoveringBound {
        radius: eps,
        value,
        source: CoveringSource::GmmFormula,
    })
}

/// The GMM covering formula as a radius → count function.
pub fn gmm_covering_fn(l: usize, k: usize) -> impl Fn(f64) -> f64 + Clone {
    move |eps: f64| {
        if eps < 1.0 {
            l as f64 * (1.0 + 2.0 / eps).powf(k as f64)
        } else {
            1.0
        }
    }
}

/// `constant · √(k + ln L)`.
pub fn mean_width_gmm_bound(k: usize, l: usize, constant: f64) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(Error::Parameter(format!("need k >= 1 and L >= 1 (k={k}, L={l})")));
    }
    if !(constant > 0.0) {
        return Err(Error::Parameter(format!("constant must be positive, got {constant}")));
    }
    Ok(constant * (k as f64 + (l as f64).ln()).sqrt())
}

/// Settings for the entropy-integral quadrature.
///
/// The composite midpoint rule starts at `initial_intervals` and doubles the
/// interval count until two successive estimates agree to `rel_tol`
/// (relative) or `max_intervals` is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub initial_intervals: usize,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            initial_intervals: 2048,
            rel_tol: 1e-6,
            max_intervals: 1 << 20,
        }
    }
}

pub const DEFAULT_RADIUS_MAX: f64 = 2.0;

/// `constant · ∫₀^radius_max √(ln N(ε)) dε` with the default quadrature.
pub fn dudley_bound(covering: impl Fn(f64) -> f64, radius_max: f64, constant: f64) -> Result<f64> {
    dudley_bound_with(covering, radius_max, constant, Quadrature::default())
}

pub fn dudley_bound_with(
    covering: impl Fn(f64) -> f64,
    radius_max: f64,
    constant: f64,
    quad: Quadrature,
) -> Result<f64> {
    if !(radius_max > 0.0) {
        return Err(Error::Parameter(format!("radius_max must be positive, got {radius_max}")));
    }
    if !(constant > 0.0) {
        return Err(Error::Parameter(format!("constant must be positive, got {constant}")));
    }
    if quad.initial_intervals < 2000 {
        return Err(Error::Parameter("quadrature needs at least 2000 subintervals".into()));
    }
    let integrand = |eps: f64| -> Result<f64> {
        let n = covering(eps);
        if n.is_nan() || n < 1.0 {
            return Err(Error::Contract(format!("covering number {n} < 1 at radius {eps}")));
        }
        if n.is_infinite() {
            return Err(Error::NumericalFailure(format!("covering number overflowed at radius {eps}")));
        }
        Ok(if n == 1.0 { 0.0 } else { n.ln().sqrt() })
    };
    let midpoint = |intervals: usize| -> Result<f64> {
        let h = radius_max / intervals as f64;
        let mut sum = 0.0;
        for i in 0..intervals {
            sum += integrand((i as f64 + 0.5) * h)?;
        }
        Ok(sum * h)
    };
    let mut intervals = quad.initial_intervals;
    let mut current = midpoint(intervals)?;
    while intervals * 2 <= quad.max_intervals {
        intervals *= 2;
        let refined = midpoint(intervals)?;
        let converged = (refined - current).abs() <= quad.rel_tol * refined.abs();
        current = refined;
        if converged {
            break;
        }
    }
    Ok(constant * current)
}

/// `exp(constant · width² / ε²)`: the ε-net size estimate.
pub fn sudakov_net_size(width: f64, eps: f64, constant: f64) -> Result<f64> {
    if !(width >= 0.0) {
        return Err(Error::Parameter(format!("width must be nonnegative, got {width}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {eps}")));
    }
    if !(constant > 0.0) {
        return Err(Error::Parameter(format!("constant must be positive, got {constant}")));
    }
    Ok((constant * width * width / (eps * eps)).exp())
}

/// Radius shrink factor `1 + ω/√m` of one layer.
pub fn layer_growth_factor(width: f64, m: usize) -> f64 {
    1.0 + width / (m as f64).sqrt()
}

/// Covering function after one random layer: `ε ↦ base(ε / (1 + ω/√m))`.
pub fn layer_covering_recursion<F>(base: F, width: f64, m: usize) -> Result<impl Fn(f64) -> f64 + Clone>
where
    F: Fn(f64) -> f64 + Clone,
{
    if !(width >= 0.0) {
        return Err(Error::Parameter(format!("width must be nonnegative, got {width}")));
    }
    if m == 0 {
        return Err(Error::Parameter("layer width m must be >= 1".into()));
    }
    let factor = layer_growth_factor(width, m);
    Ok(move |eps: f64| base(eps / factor))
}
