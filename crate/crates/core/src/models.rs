//! Data models on the unit sphere and seeded samplers.
//!
//! A GMM component here is a random `k`-dimensional subspace of `R^n`: a
//! sample draws standard Gaussian coefficients in that subspace and projects
//! the result to the unit sphere. Optional centers shift each component
//! before projection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::{self, streams};

/// Tolerance for the unit-norm and orthonormality invariants.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gmm,
    UnionOfSubspaces,
    ExplicitCloud,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    kind: ModelKind,
    ambient_dim: usize,
    intrinsic_dim: usize,
    bases: Vec<Matrix>,
    centers: Option<Vec<Vec<f64>>>,
    cloud: Option<Vec<Vec<f64>>>,
    seed: u64,
}

/// Where a point cloud came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub model: ModelKind,
    pub seed: u64,
    pub count: usize,
}

/// A finite set of unit vectors in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
    provenance: Option<Provenance>,
}

fn check_dims(n: usize, k: usize, l: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("ambient dimension n must be >= 1".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("intrinsic dimension k must satisfy 1 <= k <= n (k={k}, n={n})")));
    }
    if l == 0 {
        return Err(Error::Parameter("number of components L must be >= 1".into()));
    }
    Ok(())
}

fn random_bases(n: usize, k: usize, l: usize, seed: u64) -> Result<Vec<Matrix>> {
    (0..l)
        .map(|j| {
            let offset = (j * n * k) as u64;
            let g = Matrix::from_fn(n, k, |i, c| {
                rng::gaussian_at(seed, streams::BASIS, offset + (i * k + c) as u64)
            });
            linalg::qr(&g).map(|(q, _)| q)
        })
        .collect()
}

/// GMM with `L` random `k`-dimensional components in `R^n`, centered at the origin.
pub fn make_gmm_model(n: usize, k: usize, l: usize, seed: u64) -> Result<ManifoldModel> {
    check_dims(n, k, l)?;
    Ok(ManifoldModel {
        kind: ModelKind::Gmm,
        ambient_dim: n,
        intrinsic_dim: k,
        bases: random_bases(n, k, l, seed)?,
        centers: None,
        cloud: None,
        seed,
    })
}

/// Union of `L` random `k`-dimensional subspaces intersected with the sphere.
pub fn make_union_of_subspaces(n: usize, k: usize, l: usize, seed: u64) -> Result<ManifoldModel> {
    let mut m = make_gmm_model(n, k, l, seed)?;
    m.kind = ModelKind::UnionOfSubspaces;
    Ok(m)
}

impl ManifoldModel {
    /// Wraps an explicit list of unit vectors.
    pub fn explicit(points: Vec<Vec<f64>>) -> Result<Self> {
        let cloud = PointCloud::new(points)?;
        let n = cloud.dim();
        Ok(Self {
            kind: ModelKind::ExplicitCloud,
            ambient_dim: n,
            intrinsic_dim: n,
            bases: Vec::new(),
            centers: None,
            cloud: Some(cloud.points),
            seed: 0,
        })
    }

    /// Builds a GMM / union-of-subspaces model from caller-supplied orthonormal bases.
    pub fn from_bases(kind: ModelKind, bases: Vec<Matrix>, seed: u64) -> Result<Self> {
        if kind == ModelKind::ExplicitCloud {
            return Err(Error::Parameter("use ManifoldModel::explicit for point clouds".into()));
        }
        let first = bases
            .first()
            .ok_or_else(|| Error::Parameter("need at least one basis".into()))?;
        let (n, k) = (first.rows(), first.cols());
        check_dims(n, k, bases.len())?;
        if bases.iter().any(|b| b.rows() != n || b.cols() != k) {
            return Err(Error::Parameter("all bases must share the same shape".into()));
        }
        let model = Self {
            kind,
            ambient_dim: n,
            intrinsic_dim: k,
            bases,
            centers: None,
            cloud: None,
            seed,
        };
        model.check_invariants().map_err(|e| Error::Parameter(e.to_string()))?;
        Ok(model)
    }

    /// Adds random unit-vector centers to a GMM (one per component).
    pub fn with_random_centers(mut self, seed: u64) -> Result<Self> {
        if self.kind != ModelKind::Gmm {
            return Err(Error::Parameter("centers are only defined for GMM models".into()));
        }
        let n = self.ambient_dim;
        let centers = (0..self.bases.len())
            .map(|j| {
                let g: Vec<f64> = (0..n)
                    .map(|i| rng::gaussian_at(seed, streams::CENTERS, (j * n + i) as u64))
                    .collect();
                linalg::normalized(&g).ok_or_else(|| Error::DegenerateInput("zero center draw".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.centers = Some(centers);
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    /// Number of components `L` (1 for explicit clouds).
    pub fn components(&self) -> usize {
        self.bases.len().max(1)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bases(&self) -> &[Matrix] {
        &self.bases
    }

    pub fn centers(&self) -> Option<&[Vec<f64>]> {
        self.centers.as_deref()
    }

    pub fn cloud(&self) -> Option<&[Vec<f64>]> {
        self.cloud.as_deref()
    }

    /// Orthonormal basis of the smallest subspace holding every point of
    /// component `j`: the component basis, extended by its center if any.
    pub fn component_span(&self, j: usize) -> Result<Matrix> {
        let basis = self
            .bases
            .get(j)
            .ok_or_else(|| Error::Parameter(format!("model has no stored basis for component {j}")))?;
        match &self.centers {
            None => Ok(basis.clone()),
            Some(c) => {
                let n = self.ambient_dim;
                let k = basis.cols();
                if k == n {
                    return Ok(basis.clone());
                }
                let aug = Matrix::from_fn(n, k + 1, |i, col| if col < k { basis.get(i, col) } else { c[j][i] });
                linalg::qr(&aug).map(|(q, _)| q)
            }
        }
    }

    /// Checks the stored bases and points against the unit/orthonormal tolerances.
    pub fn check_invariants(&self) -> Result<()> {
        if self.intrinsic_dim > self.ambient_dim {
            return Err(Error::Contract("k exceeds n".into()));
        }
        for (j, b) in self.bases.iter().enumerate() {
            let g = b.gram();
            for r in 0..g.rows() {
                for c in 0..g.cols() {
                    let e = if r == c { 1.0 } else { 0.0 };
                    if (g.get(r, c) - e).abs() > UNIT_TOL {
                        return Err(Error::Contract(format!("basis {j} is not orthonormal")));
                    }
                }
            }
        }
        if let Some(cloud) = &self.cloud {
            PointCloud::check_unit(cloud)?;
        }
        Ok(())
    }
}

/// Draws `count` points from `model`.
///
/// Point `p` picks its component from `uniform_at(seed, SAMPLE_COMPONENT, p)` and
/// its coefficients from counters `p*k .. p*k + k` of the coefficient stream, so
/// the cloud is a pure function of `(model, count, seed)`.
pub fn sample_points(model: &ManifoldModel, count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(Error::Parameter("count must be >= 1".into()));
    }
    let provenance = Provenance {
        model: model.kind,
        seed,
        count,
    };
    if let Some(stored) = &model.cloud {
        if count > stored.len() {
            return Err(Error::Parameter(format!(
                "requested {count} points from an explicit cloud of {}",
                stored.len()
            )));
        }
        // seeded Fisher-Yates, first `count` entries
        let mut idx: Vec<usize> = (0..stored.len()).collect();
        for i in 0..count {
            let u = rng::uniform_at(seed, streams::SHUFFLE, i as u64);
            let j = i + ((u * (stored.len() - i) as f64) as usize).min(stored.len() - i - 1);
            idx.swap(i, j);
        }
        let points = idx[..count].iter().map(|&i| stored[i].clone()).collect();
        return Ok(PointCloud {
            points,
            labels: None,
            provenance: Some(provenance),
        });
    }

    let l = model.bases.len();
    let k = model.intrinsic_dim;
    let n = model.ambient_dim;
    let drawn: Vec<(Vec<f64>, usize)> = (0..count)
        .into_par_iter()
        .map(|p| {
            let u = rng::uniform_at(seed, streams::SAMPLE_COMPONENT, p as u64);
            let j = ((u * l as f64) as usize).min(l - 1);
            let basis = &model.bases[j];
            let mut x = match &model.centers {
                Some(c) => c[j].clone(),
                None => vec![0.0; n],
            };
            for c in 0..k {
                let coeff = rng::gaussian_at(seed, streams::SAMPLE_COEFF, (p * k + c) as u64);
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += coeff * basis.get(i, c);
                }
            }
            let x = linalg::normalized(&x)
                .ok_or_else(|| Error::DegenerateInput(format!("sample {p} drew the zero vector")))?;
            Ok((x, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let (points, labels) = drawn.into_iter().unzip();
    Ok(PointCloud {
        points,
        labels: Some(labels),
        provenance: Some(provenance),
    })
}

impl PointCloud {
    /// Builds a cloud from unit vectors of a common dimension.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("point cloud must be nonempty".into()));
        }
        Self::check_unit(&points)?;
        Ok(Self {
            points,
            labels: None,
            provenance: None,
        })
    }

    fn check_unit(points: &[Vec<f64>]) -> Result<()> {
        let n = points.first().map_or(0, Vec::len);
        for (i, p) in points.iter().enumerate() {
            if p.len() != n || n == 0 {
                return Err(Error::Parameter(format!("point {i} has dimension {}, expected {n}", p.len())));
            }
            let norm = linalg::norm(p);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::Parameter(format!("point {i} has norm {norm}, expected 1")));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    /// Component index of each point, for sampled GMM/UoS clouds.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// The first `count` points, keeping labels.
    pub fn truncated(&self, count: usize) -> PointCloud {
        let count = count.min(self.points.len());
        PointCloud {
            points: self.points[..count].to_vec(),
            labels: self.labels.as_ref().map(|l| l[..count].to_vec()),
            provenance: self.provenance.clone(),
        }
    }
}

/// Serializable model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub components: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub centers: bool,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ManifoldModel> {
        let model = match self.kind {
            ModelKind::Gmm => make_gmm_model(self.n, self.k, self.components, self.seed)?,
            ModelKind::UnionOfSubspaces => make_union_of_subspaces(self.n, self.k, self.components, self.seed)?,
            ModelKind::ExplicitCloud => {
                return Err(Error::Parameter(
                    "explicit clouds are built from points, not from a model description".into(),
                ))
            }
        };
        if self.centers {
            model.with_random_centers(rng::derive_seed(self.seed, 1))
        } else {
            Ok(model)
        }
    }
}
