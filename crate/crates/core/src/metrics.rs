//! Distances on layer outputs, distortion reports and greedy ε-nets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::width::{CoveringBound, CoveringSource};

/// Fraction of coordinates whose positivity differs: `(1/m)·#{i : [u_i > 0] ≠ [v_i > 0]}`.
pub fn hamming_variant(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Parameter(format!("length mismatch: {} vs {}", u.len(), v.len())));
    }
    if u.is_empty() {
        return Err(Error::Parameter("vectors must be nonempty".into()));
    }
    let differ = u.iter().zip(v).filter(|(a, b)| (**a > 0.0) != (**b > 0.0)).count();
    Ok(differ as f64 / u.len() as f64)
}

/// Normalized angle `arccos⟨x, y⟩ / π` between unit vectors.
pub fn geodesic_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Parameter(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    for (name, v) in [("x", x), ("y", y)] {
        let n = linalg::norm(v);
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::Parameter(format!("{name} has norm {n}, expected a unit vector")));
        }
    }
    Ok(linalg::dot(x, y).clamp(-1.0, 1.0).acos() / std::f64::consts::PI)
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Parameter(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    Ok(linalg::distance(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreMetric {
    Euclidean,
    Geodesic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostMetric {
    HammingVariant,
    Euclidean,
}

impl PreMetric {
    pub fn name(&self) -> &'static str {
        match self {
            PreMetric::Euclidean => "euclidean",
            PreMetric::Geodesic => "geodesic",
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            PreMetric::Euclidean => euclidean_distance(x, y),
            PreMetric::Geodesic => geodesic_distance(x, y),
        }
    }
}

impl PostMetric {
    pub fn name(&self) -> &'static str {
        match self {
            PostMetric::HammingVariant => "hamming_variant",
            PostMetric::Euclidean => "euclidean",
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            PostMetric::HammingVariant => hamming_variant(x, y),
            PostMetric::Euclidean => euclidean_distance(x, y),
        }
    }
}

/// How well `d_post ≈ c · d_pre` holds over all pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub pairs: usize,
    /// Least-squares `c` through the origin.
    pub scale_constant: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub spearman: f64,
    pub pre_metric: PreMetric,
    pub post_metric: PostMetric,
}

/// All pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairwise_distances(
    pre: &[Vec<f64>],
    post: &[Vec<f64>],
    pre_metric: PreMetric,
    post_metric: PostMetric,
) -> Result<Vec<(f64, f64)>> {
    if pre.len() != post.len() {
        return Err(Error::Parameter(format!(
            "clouds are not aligned: {} input points vs {} output points",
            pre.len(),
            post.len()
        )));
    }
    if pre.len() < 2 {
        return Err(Error::Parameter("need at least 2 points".into()));
    }
    let rows: Vec<Vec<(f64, f64)>> = (0..pre.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..pre.len())
                .map(|j| Ok((pre_metric.eval(&pre[i], &pre[j])?, post_metric.eval(&post[i], &post[j])?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Fractional ranks (ties share their average rank), 1-based.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation; 0 when either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

pub fn distortion_report(
    pre: &[Vec<f64>],
    post: &[Vec<f64>],
    pre_metric: PreMetric,
    post_metric: PostMetric,
) -> Result<DistortionReport> {
    let pairs = pairwise_distances(pre, post, pre_metric, post_metric)?;
    let (sxy, sxx) = pairs
        .iter()
        .fold((0.0, 0.0), |(sxy, sxx), (x, y)| (sxy + x * y, sxx + x * x));
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all input distances are zero".into()));
    }
    let c = sxy / sxx;
    let mut max_residual = 0.0f64;
    let mut total = 0.0;
    for (x, y) in &pairs {
        let r = (y - c * x).abs();
        max_residual = max_residual.max(r);
        total += r;
    }
    let (d_pre, d_post): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    Ok(DistortionReport {
        pairs: pairs.len(),
        scale_constant: c,
        max_residual,
        mean_residual: total / pairs.len() as f64,
        spearman: spearman(&d_pre, &d_post),
        pre_metric,
        post_metric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringEstimate {
    pub radius: f64,
    pub net_size: usize,
    pub cloud_size: usize,
}

impl CoveringEstimate {
    pub fn as_bound(&self) -> CoveringBound {
        CoveringBound {
            radius: self.radius,
            value: self.net_size as f64,
            source: CoveringSource::EmpiricalNet,
        }
    }
}

/// Greedy ε-net in index order: a point joins the net iff it is farther than
/// `eps` from every current net point. Returns the net indices.
pub fn greedy_net(points: &[Vec<f64>], eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {eps}")));
    }
    if points.is_empty() {
        return Err(Error::Parameter("cloud must be nonempty".into()));
    }
    let eps2 = eps * eps;
    let mut net: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let covered = net.iter().any(|&c| {
            let d2: f64 = p.iter().zip(&points[c]).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= eps2
        });
        if !covered {
            net.push(i);
        }
    }
    Ok(net)
}

pub fn empirical_covering(points: &[Vec<f64>], eps: f64) -> Result<CoveringEstimate> {
    Ok(CoveringEstimate {
        radius: eps,
        net_size: greedy_net(points, eps)?.len(),
        cloud_size: points.len(),
    })
}

/// Outcome of one layer-covering check at radius `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringCheck {
    pub eps: f64,
    /// `eps / (1 + width/√m)`
    pub shrunk_radius: f64,
    pub net_size_pre: usize,
    pub net_size_post: usize,
    /// `slack · net_size_pre`
    pub bound_rhs: f64,
    pub pass: bool,
}

/// Passes iff `net(post, ε) ≤ slack · net(pre, ε / (1 + width/√m))`.
pub fn verify_covering_recursion(
    pre: &[Vec<f64>],
    post: &[Vec<f64>],
    eps: f64,
    width_est: f64,
    m: usize,
    slack: f64,
) -> Result<CoveringCheck> {
    if pre.len() != post.len() {
        return Err(Error::Parameter(format!(
            "clouds are not aligned: {} vs {}",
            pre.len(),
            post.len()
        )));
    }
    if !(slack >= 1.0) {
        return Err(Error::Parameter(format!("slack must be >= 1, got {slack}")));
    }
    if !(width_est >= 0.0) || m == 0 {
        return Err(Error::Parameter("need width >= 0 and m >= 1".into()));
    }
    let shrunk = eps / crate::width::layer_growth_factor(width_est, m);
    let net_post = empirical_covering(post, eps)?.net_size;
    let net_pre = empirical_covering(pre, shrunk)?.net_size;
    let rhs = slack * net_pre as f64;
    Ok(CoveringCheck {
        eps,
        shrunk_radius: shrunk,
        net_size_pre: net_pre,
        net_size_post: net_post,
        bound_rhs: rhs,
        pass: net_post as f64 <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_examples() {
        let u = [1.0, -1.0, 2.0];
        assert_eq!(hamming_variant(&u, &u).unwrap(), 0.0);
        assert_eq!(hamming_variant(&u, &[3.0, -2.0, -1.0]).unwrap(), 1.0 / 3.0);
        assert_eq!(hamming_variant(&[1.0; 5], &[-1.0; 5]).unwrap(), 1.0);
        // zero is not positive
        assert_eq!(hamming_variant(&[0.0], &[-3.0]).unwrap(), 0.0);
        assert!(hamming_variant(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let x = [1.0, 0.0];
        assert_eq!(geodesic_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(geodesic_distance(&x, &[-1.0, 0.0]).unwrap(), 1.0);
        assert!((geodesic_distance(&x, &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(geodesic_distance(&x, &[0.0, 2.0]).is_err());
    }

    #[test]
    fn identity_embedding_report() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-0.6, 0.8], vec![0.6, -0.8]];
        let r = distortion_report(&pts, &pts, PreMetric::Euclidean, PostMetric::Euclidean).unwrap();
        assert_eq!(r.pairs, 6);
        assert_eq!(r.scale_constant, 1.0);
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.mean_residual, 0.0);
        assert!((r.spearman - 1.0).abs() < 1e-12);
        assert!(distortion_report(&pts, &pts[..3], PreMetric::Euclidean, PostMetric::Euclidean).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn covering_examples() {
        assert_eq!(empirical_covering(&[vec![1.0, 0.0]], 0.1).unwrap().net_size, 1);
        let anti = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert_eq!(empirical_covering(&anti, 1.0).unwrap().net_size, 2);
        assert_eq!(empirical_covering(&anti, 2.0).unwrap().net_size, 1);
        assert!(empirical_covering(&anti, 0.0).is_err());
    }

    #[test]
    fn covering_check_identity_and_large_radius() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.6, 0.8]];
        let c = verify_covering_recursion(&pts, &pts, 0.5, 0.0, 2, 1.0).unwrap();
        assert_eq!(c.net_size_pre, c.net_size_post);
        assert!(c.pass);
        let c = verify_covering_recursion(&pts, &pts, 4.0, 1.0, 2, 1.0).unwrap();
        assert_eq!((c.net_size_pre, c.net_size_post), (1, 1));
        assert!(verify_covering_recursion(&pts, &pts, 0.5, 0.0, 2, 0.5).is_err());
    }
}
