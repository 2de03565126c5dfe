//! Random Gaussian layers, semi-truncated linear activations and stacks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    TruncatedLinear,
    Identity,
}

/// `f(x) = slope · clamp(x, lower, upper)` for `TruncatedLinear`,
/// `max(0, x)` for `Relu`, `x` for `Identity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    #[serde(default = "one")]
    pub slope: f64,
    #[serde(default = "neg_inf")]
    pub lower: f64,
    #[serde(default = "pos_inf")]
    pub upper: f64,
}

fn one() -> f64 {
    1.0
}
fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}
fn pos_inf() -> f64 {
    f64::INFINITY
}

impl Default for ActivationSpec {
    fn default() -> Self {
        Self::relu()
    }
}

impl ActivationSpec {
    pub fn relu() -> Self {
        Self {
            kind: ActivationKind::Relu,
            slope: 1.0,
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn identity() -> Self {
        Self {
            kind: ActivationKind::Identity,
            slope: 1.0,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    /// `slope · clamp(x, lower, upper)` with `slope ∈ (0, 1]`, `lower ≤ 0 < upper`.
    /// `upper = 0` is rejected: it would send every positive input to 0.
    pub fn truncated(slope: f64, lower: f64, upper: f64) -> Result<Self> {
        let spec = Self {
            kind: ActivationKind::TruncatedLinear,
            slope,
            lower,
            upper,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ActivationKind::TruncatedLinear {
            if !(self.slope > 0.0 && self.slope <= 1.0) {
                return Err(Error::Parameter(format!("slope must lie in (0, 1], got {}", self.slope)));
            }
            if !(self.lower <= 0.0) || !(self.upper > 0.0) {
                return Err(Error::Parameter(format!(
                    "need lower <= 0 < upper, got [{}, {}]",
                    self.lower, self.upper
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Identity => x,
            ActivationKind::TruncatedLinear => self.slope * x.max(self.lower).min(self.upper),
        }
    }

    /// Almost-everywhere derivative.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Identity => 1.0,
            ActivationKind::TruncatedLinear => {
                if x > self.lower && x < self.upper {
                    self.slope
                } else {
                    0.0
                }
            }
        }
    }
}

/// Per-property outcome of [`validate_semi_truncated`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemiTruncatedReport {
    /// `f(0) = 0`
    pub zero_at_origin: bool,
    /// `0 < f(x) ≤ x` for `x > 0`
    pub positive_side: bool,
    /// `0 ≥ f(x) ≥ x` for `x < 0`
    pub negative_side: bool,
    /// linear on an interval around 0, constant outside it
    pub piecewise_shape: bool,
}

impl SemiTruncatedReport {
    pub fn all_pass(&self) -> bool {
        self.zero_at_origin && self.positive_side && self.negative_side && self.piecewise_shape
    }
}

/// Symmetric log-spaced grid `{±10^t} ∪ {0}` with `t ∈ [-6, 6]`, sorted.
fn symmetric_log_grid(points: usize) -> Vec<f64> {
    let half = (points / 2).max(2);
    let mut grid: Vec<f64> = (0..half)
        .map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / (half - 1) as f64))
        .collect();
    let neg: Vec<f64> = grid.iter().rev().map(|x| -x).collect();
    let mut out = neg;
    out.push(0.0);
    out.append(&mut grid);
    out
}

/// Checks the semi-truncated linear definition for `f` on a symmetric
/// log-spaced grid of about `grid` points.
///
/// The shape check reads the secant slopes between consecutive grid points:
/// they must run constant (0), linear (common slope), constant (0), with at
/// most one transition segment at each breakpoint, and the linear run must
/// touch the origin.
pub fn validate_semi_truncated(f: impl Fn(f64) -> f64, grid: usize) -> Result<SemiTruncatedReport> {
    if grid < 100 {
        return Err(Error::Parameter(format!("grid must have at least 100 points, got {grid}")));
    }
    let xs = symmetric_log_grid(grid);
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let tol = |x: f64| 1e-12 * x.abs().max(1.0);

    let zero_at_origin = f(0.0) == 0.0;
    let positive_side = xs
        .iter()
        .zip(&ys)
        .filter(|(x, _)| **x > 0.0)
        .all(|(&x, &y)| y > 0.0 && y <= x + tol(x));
    let negative_side = xs
        .iter()
        .zip(&ys)
        .filter(|(x, _)| **x < 0.0)
        .all(|(&x, &y)| y <= 0.0 && y >= x - tol(x));

    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let origin = xs.iter().position(|&x| x == 0.0).unwrap_or(0);
    // slope of the linear piece: the steeper of the two segments at the origin
    let s_left = slopes[origin - 1];
    let s_right = slopes[origin];
    let s = if s_left.abs() >= s_right.abs() { s_left } else { s_right };
    let piecewise_shape = if !s.is_finite() {
        false
    } else {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1.0);
        // 0 = constant, 1 = linear, 2 = transition
        let class: Vec<u8> = slopes
            .iter()
            .map(|&d| {
                if close(d, 0.0) {
                    0
                } else if close(d, s) {
                    1
                } else {
                    2
                }
            })
            .collect();
        let touches_origin = class[origin - 1] == 1 || class[origin] == 1 || close(s, 0.0);
        touches_origin && shape_ok(&class)
    };

    Ok(SemiTruncatedReport {
        zero_at_origin,
        positive_side,
        negative_side,
        piecewise_shape,
    })
}

/// Accepts `0* [2] 1* [2] 0*` with at least one linear or transition entry
/// between the constant runs.
fn shape_ok(class: &[u8]) -> bool {
    let mut i = 0;
    while i < class.len() && class[i] == 0 {
        i += 1;
    }
    if i < class.len() && class[i] == 2 {
        i += 1;
    }
    while i < class.len() && class[i] == 1 {
        i += 1;
    }
    if i < class.len() && class[i] == 2 {
        i += 1;
    }
    while i < class.len() && class[i] == 0 {
        i += 1;
    }
    i == class.len()
}

/// Convenience wrapper for an [`ActivationSpec`].
pub fn validate_activation(spec: &ActivationSpec, grid: usize) -> Result<SemiTruncatedReport> {
    validate_semi_truncated(|x| spec.eval(x), grid)
}

/// One layer `x ↦ f(Mx)` with `M` an `m × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomLayer {
    matrix: Matrix,
    activation: ActivationSpec,
    seed: u64,
}

/// Draws `M` with i.i.d. `N(0, 1/m)` entries; entry `(i, j)` is Gaussian
/// counter `i*n + j` of `(seed, LAYER)` scaled by `1/√m`. For a fixed seed the
/// unscaled rows of a narrower layer are a prefix of those of a wider one.
pub fn make_layer(n: usize, m: usize, activation: ActivationSpec, seed: u64) -> Result<RandomLayer> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter(format!("layer dims must be positive (n={n}, m={m})")));
    }
    activation.validate()?;
    let scale = 1.0 / (m as f64).sqrt();
    let stream = rng::GaussianStream::new(seed, streams::LAYER);
    let matrix = Matrix::from_fn(m, n, |i, j| stream.at((i * n + j) as u64) * scale);
    Ok(RandomLayer {
        matrix,
        activation,
        seed,
    })
}

impl RandomLayer {
    /// A layer with a caller-supplied matrix, e.g. the identity for control runs.
    pub fn from_matrix(matrix: Matrix, activation: ActivationSpec) -> Result<Self> {
        activation.validate()?;
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::Parameter("empty layer matrix".into()));
        }
        Ok(Self {
            matrix,
            activation,
            seed: 0,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn activation(&self) -> &ActivationSpec {
        &self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.in_dim() {
            return Err(Error::Parameter(format!(
                "input has dimension {}, layer expects {}",
                x.len(),
                self.in_dim()
            )));
        }
        Ok(())
    }

    /// `Mx`.
    pub fn pre_activation(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.matrix.matvec(x))
    }

    /// `f(Mx)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.pre_activation(x)?;
        for v in z.iter_mut() {
            *v = self.activation.eval(*v);
        }
        Ok(z)
    }

    /// Applies the layer to every point, preserving order.
    pub fn apply_all(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        points.par_iter().map(|x| self.apply(x)).collect()
    }
}

pub fn apply_layer(layer: &RandomLayer, x: &[f64]) -> Result<Vec<f64>> {
    layer.apply(x)
}

/// Points after one stage of a stack.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    pub points: Vec<Vec<f64>>,
    /// Norms divided out by renormalization; empty when not renormalized.
    pub scales: Vec<f64>,
}

/// Propagates `points` through `layers`.
///
/// Entry 0 of the result is the input itself, entry `i` the output of layer
/// `i` (1-based). With `renormalize`, each layer output is scaled to unit
/// norm and the divided-out norms are kept in `scales`.
pub fn forward_stack(layers: &[RandomLayer], points: &[Vec<f64>], renormalize: bool) -> Result<Vec<LayerOutput>> {
    for w in layers.windows(2) {
        if w[0].out_dim() != w[1].in_dim() {
            return Err(Error::Parameter(format!(
                "layer output dim {} does not match next input dim {}",
                w[0].out_dim(),
                w[1].in_dim()
            )));
        }
    }
    let mut out = vec![LayerOutput {
        points: points.to_vec(),
        scales: Vec::new(),
    }];
    for (li, layer) in layers.iter().enumerate() {
        let input = &out.last().expect("nonempty").points;
        let mapped: Vec<(Vec<f64>, f64)> = input
            .par_iter()
            .enumerate()
            .map(|(p, x)| {
                let y = layer.apply(x)?;
                if !renormalize {
                    return Ok((y, 1.0));
                }
                let nrm = linalg::norm(&y);
                if nrm == 0.0 {
                    return Err(Error::DegenerateOutput { layer: li + 1, point: p });
                }
                Ok((y.into_iter().map(|v| v / nrm).collect(), nrm))
            })
            .collect::<Result<_>>()?;
        let (points, scales): (Vec<_>, Vec<_>) = mapped.into_iter().unzip();
        out.push(LayerOutput {
            points,
            scales: if renormalize { scales } else { Vec::new() },
        });
    }
    Ok(out)
}

/// Serializable layer description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub n: usize,
    pub m: usize,
    pub activation: ActivationKind,
    #[serde(default = "one")]
    pub slope: f64,
    #[serde(default = "neg_inf")]
    pub a: f64,
    #[serde(default = "pos_inf")]
    pub b: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LayerSpec {
    pub fn activation_spec(&self) -> ActivationSpec {
        match self.activation {
            ActivationKind::Relu => ActivationSpec::relu(),
            ActivationKind::Identity => ActivationSpec::identity(),
            ActivationKind::TruncatedLinear => ActivationSpec {
                kind: ActivationKind::TruncatedLinear,
                slope: self.slope,
                lower: self.a,
                upper: self.b,
            },
        }
    }

    pub fn build(&self) -> Result<RandomLayer> {
        make_layer(self.n, self.m, self.activation_spec(), self.seed)
    }
}

pub fn build_stack(specs: &[LayerSpec]) -> Result<Vec<RandomLayer>> {
    specs.iter().map(LayerSpec::build).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_and_truncated_pass_validation() {
        assert!(validate_activation(&ActivationSpec::relu(), 200).unwrap().all_pass());
        for spec in [
            ActivationSpec::truncated(1.0, -1.0, 2.0).unwrap(),
            ActivationSpec::truncated(0.5, f64::NEG_INFINITY, 3.0).unwrap(),
            ActivationSpec::truncated(0.25, -0.01, f64::INFINITY).unwrap(),
            ActivationSpec::truncated(1.0, 0.0, f64::INFINITY).unwrap(),
        ] {
            let r = validate_activation(&spec, 400).unwrap();
            assert!(r.all_pass(), "{spec:?}: {r:?}");
        }
    }

    #[test]
    fn counterexamples_fail_validation() {
        let r = validate_semi_truncated(|x| 2.0 * x, 200).unwrap();
        assert!(!r.positive_side);
        assert!(r.zero_at_origin);
        let r = validate_semi_truncated(|x| x + 0.1, 200).unwrap();
        assert!(!r.zero_at_origin);
        let r = validate_semi_truncated(f64::tanh, 200).unwrap();
        assert!(!r.piecewise_shape);
        let r = validate_semi_truncated(|x| x.clamp(-1.0, 0.0), 200).unwrap();
        assert!(!r.positive_side);
        assert!(validate_semi_truncated(|x| x, 50).is_err());
    }

    #[test]
    fn truncated_constructor_checks_ranges() {
        assert!(ActivationSpec::truncated(2.0, -1.0, 1.0).is_err());
        assert!(ActivationSpec::truncated(0.0, -1.0, 1.0).is_err());
        assert!(ActivationSpec::truncated(1.0, 0.5, 1.0).is_err());
        assert!(ActivationSpec::truncated(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn layer_shape_and_determinism() {
        let l = make_layer(1, 1, ActivationSpec::identity(), 3).unwrap();
        assert_eq!((l.out_dim(), l.in_dim()), (1, 1));
        assert_eq!(l.matrix().get(0, 0), rng::gaussian_at(3, streams::LAYER, 0));
        let a = make_layer(5, 7, ActivationSpec::relu(), 9).unwrap();
        let b = make_layer(5, 7, ActivationSpec::relu(), 9).unwrap();
        assert_eq!(a, b);
        assert!(make_layer(0, 3, ActivationSpec::relu(), 0).is_err());
    }

    #[test]
    fn wider_layer_extends_narrower() {
        let small = make_layer(4, 8, ActivationSpec::relu(), 2).unwrap();
        let big = make_layer(4, 32, ActivationSpec::relu(), 2).unwrap();
        let ratio = (32f64 / 8.0).sqrt();
        for i in 0..8 {
            for j in 0..4 {
                assert!((small.matrix().get(i, j) - big.matrix().get(i, j) * ratio).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_contracts() {
        let relu = make_layer(6, 10, ActivationSpec::relu(), 1).unwrap();
        assert!(relu.apply(&[0.0; 6]).unwrap().iter().all(|&v| v == 0.0));
        let x = [0.3, -0.2, 0.1, 0.5, -0.7, 0.2];
        let z = relu.pre_activation(&x).unwrap();
        let y = relu.apply(&x).unwrap();
        for (zi, yi) in z.iter().zip(&y) {
            assert!(*yi >= 0.0);
            if *zi > 0.0 {
                assert_eq!(zi, yi);
            }
        }
        let id = RandomLayer::from_matrix(relu.matrix().clone(), ActivationSpec::identity()).unwrap();
        assert_eq!(id.apply(&x).unwrap(), z);
        assert!(relu.apply(&[1.0]).is_err());
    }

    #[test]
    fn stack_identity_and_renormalization() {
        let pts = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8]];
        let out = forward_stack(&[], &pts, true).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].points, pts);

        let layer = make_layer(3, 16, ActivationSpec::identity(), 4).unwrap();
        let out = forward_stack(std::slice::from_ref(&layer), &pts, true).unwrap();
        for (p, x) in out[1].points.iter().zip(&pts) {
            assert!((linalg::norm(p) - 1.0).abs() < 1e-12);
            let mx = layer.apply(x).unwrap();
            let expect = linalg::normalized(&mx).unwrap();
            assert!(linalg::distance(p, &expect) < 1e-15);
        }
        assert_eq!(out[1].scales.len(), 2);

        let bad = make_layer(16, 4, ActivationSpec::relu(), 0).unwrap();
        assert!(forward_stack(&[bad.clone(), bad], &pts, true).is_err());
    }

    #[test]
    fn zero_output_is_reported() {
        let m = Matrix::from_row_major(2, 2, vec![-1.0, 0.0, 0.0, -1.0]).unwrap();
        let layer = RandomLayer::from_matrix(m, ActivationSpec::relu()).unwrap();
        let pts = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        match forward_stack(&[layer], &pts, true) {
            Err(Error::DegenerateOutput { layer, point }) => assert_eq!((layer, point), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn layer_spec_from_toml() {
        let spec: LayerSpec = toml::from_str("n = 4\nm = 8\nactivation = \"truncated_linear\"\nslope = 0.5\na = -1.0\nb = inf\nseed = 3\n").unwrap();
        let layer = spec.build().unwrap();
        assert_eq!(layer.activation().upper, f64::INFINITY);
        assert_eq!(layer.out_dim(), 8);
    }
}
