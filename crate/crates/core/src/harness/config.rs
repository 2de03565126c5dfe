//! Experiment configuration.
//!
//! Flat TOML: `key = value` lines grouped under section headers. Every
//! section is optional and falls back to the defaults below; unknown keys
//! are rejected.
//!
//! ```toml
//! [experiment]
//! kind = "embedding"
//! seed = 42
//! replicates = 5
//!
//! [model]
//! kind = "gmm"
//! n = 128
//! k = 4
//! L = 3
//! points = 200
//!
//! [layers]
//! m_list = [64, 256, 1024]
//! activation = "relu"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{PostMetric, PreMetric};
use crate::models::{ModelConfig, ModelKind};
use crate::netsim::{ActivationKind, ActivationSpec, LayerSpec};
use crate::recovery::IterativeOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MeanWidth,
    Embedding,
    Recovery,
    Covering,
    SampleSize,
    FullSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub replicates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 or absent uses the rayon default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::FullSweep,
            seed: 0,
            replicates: 5,
            out: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub components: usize,
    pub seed: u64,
    pub centers: bool,
    /// Cloud size for width, embedding and covering experiments.
    pub points: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Gmm,
            n: 128,
            k: 4,
            components: 3,
            seed: 7,
            centers: false,
            points: 200,
        }
    }
}

impl ModelSection {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            kind: self.kind,
            n: self.n,
            k: self.k,
            components: self.components,
            seed: self.seed,
            centers: self.centers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayersSection {
    pub m_list: Vec<usize>,
    pub activation: ActivationKind,
    pub slope: f64,
    pub lower: f64,
    pub upper: f64,
    pub depth: usize,
    pub renormalize: bool,
}

impl Default for LayersSection {
    fn default() -> Self {
        Self {
            m_list: vec![64, 256, 1024],
            activation: ActivationKind::Relu,
            slope: 1.0,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            depth: 1,
            renormalize: true,
        }
    }
}

impl LayersSection {
    pub fn activation_spec(&self) -> ActivationSpec {
        match self.activation {
            ActivationKind::Relu => ActivationSpec::relu(),
            ActivationKind::Identity => ActivationSpec::identity(),
            ActivationKind::TruncatedLinear => ActivationSpec {
                kind: ActivationKind::TruncatedLinear,
                slope: self.slope,
                lower: self.lower,
                upper: self.upper,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub pre: PreMetric,
    pub post: PostMetric,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            pre: PreMetric::Geodesic,
            post: PostMetric::HammingVariant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WidthSection {
    pub probes: usize,
    pub constant: f64,
    pub eps: f64,
    pub radius_max: f64,
}

impl Default for WidthSection {
    fn default() -> Self {
        Self {
            probes: 2000,
            constant: 1.0,
            eps: 0.5,
            radius_max: crate::width::DEFAULT_RADIUS_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoveringSection {
    pub eps_list: Vec<f64>,
    pub slack: f64,
}

impl Default for CoveringSection {
    fn default() -> Self {
        Self {
            eps_list: vec![0.25, 0.5, 1.0],
            slack: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverySection {
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub iterative: bool,
    pub max_iter: usize,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Default for RecoverySection {
    fn default() -> Self {
        let it = IterativeOptions::default();
        Self {
            m_list: vec![64, 256, 1024, 4096],
            trials: 20,
            iterative: true,
            max_iter: it.max_iter,
            tol: it.tol,
            step: None,
        }
    }
}

impl RecoverySection {
    pub fn iterative_options(&self) -> Option<IterativeOptions> {
        self.iterative.then_some(IterativeOptions {
            max_iter: self.max_iter,
            step: self.step,
            tol: self.tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub model: ModelSection,
    pub layers: LayersSection,
    pub metrics: MetricsSection,
    pub width: WidthSection,
    pub covering: CoveringSection,
    pub recovery: RecoverySection,
    /// Explicit layer stack; replaces `[layers]` depth/activation for the
    /// embedding and covering experiments when present.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stack: Vec<LayerSpec>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| format!("line {}", line_of(text, s.start)))
                .unwrap_or_else(|| "config".into());
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Short hash of everything that affects results (not `out` or `threads`).
    pub fn config_hash(&self) -> String {
        let mut canon = self.clone();
        canon.experiment.out = None;
        canon.experiment.threads = None;
        let digest = Sha256::digest(canon.to_toml_string().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Checks every parameter before any computation runs.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.replicates == 0 {
            return Err(Error::config("experiment.replicates", "must be >= 1"));
        }

        let m = &self.model;
        if m.kind == ModelKind::ExplicitCloud {
            return Err(Error::config("model.kind", "explicit_cloud cannot be described in a config"));
        }
        if m.n == 0 {
            return Err(Error::config("model.n", "must be >= 1"));
        }
        if m.k == 0 || m.k > m.n {
            return Err(Error::config("model.k", format!("must satisfy 1 <= k <= n (k={}, n={})", m.k, m.n)));
        }
        if m.components == 0 {
            return Err(Error::config("model.L", "must be >= 1"));
        }
        if m.points < 2 {
            return Err(Error::config("model.points", "must be >= 2"));
        }
        if m.centers && m.kind != ModelKind::Gmm {
            return Err(Error::config("model.centers", "centers are only supported for gmm"));
        }

        let l = &self.layers;
        if l.m_list.is_empty() || l.m_list.contains(&0) {
            return Err(Error::config("layers.m_list", "must be a nonempty list of positive widths"));
        }
        if l.depth == 0 {
            return Err(Error::config("layers.depth", "must be >= 1"));
        }
        l.activation_spec()
            .validate()
            .map_err(|err| Error::config("layers.slope", err.to_string()))?;
        if self.metrics.pre == PreMetric::Geodesic && !l.renormalize && (l.depth > 1 || self.stack.len() > 1) {
            return Err(Error::config(
                "layers.renormalize",
                "geodesic input distances after the first layer need renormalize = true",
            ));
        }

        for (i, s) in self.stack.iter().enumerate() {
            if s.n == 0 || s.m == 0 {
                return Err(Error::config(format!("stack[{i}]"), "n and m must be >= 1"));
            }
            s.activation_spec()
                .validate()
                .map_err(|err| Error::config(format!("stack[{i}].slope"), err.to_string()))?;
        }
        if let Some(first) = self.stack.first() {
            if first.n != m.n {
                return Err(Error::config("stack[0].n", format!("must equal model.n = {}", m.n)));
            }
        }
        for (i, w) in self.stack.windows(2).enumerate() {
            if w[0].m != w[1].n {
                return Err(Error::config(
                    format!("stack[{}].n", i + 1),
                    format!("must equal the previous layer's m = {}", w[0].m),
                ));
            }
        }

        let w = &self.width;
        if w.probes == 0 {
            return Err(Error::config("width.probes", "must be >= 1"));
        }
        if !(w.constant > 0.0) {
            return Err(Error::config("width.constant", "must be positive"));
        }
        if !(w.eps > 0.0) {
            return Err(Error::config("width.eps", "must be positive"));
        }
        if !(w.radius_max > 0.0) {
            return Err(Error::config("width.radius_max", "must be positive"));
        }

        let c = &self.covering;
        if c.eps_list.is_empty() || c.eps_list.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::config("covering.eps_list", "must be a nonempty list of positive radii"));
        }
        if !(c.slack >= 1.0) {
            return Err(Error::config("covering.slack", "must be >= 1"));
        }

        let r = &self.recovery;
        if r.m_list.len() < 3 {
            return Err(Error::config("recovery.m_list", "needs at least 3 values"));
        }
        if r.m_list[0] == 0 || r.m_list.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::config("recovery.m_list", "must be positive and strictly ascending"));
        }
        if (*r.m_list.last().unwrap() as f64) < 10.0 * r.m_list[0] as f64 {
            return Err(Error::config("recovery.m_list", "must span at least one decade"));
        }
        if r.trials < 10 {
            return Err(Error::config("recovery.trials", "must be >= 10"));
        }
        if r.max_iter == 0 {
            return Err(Error::config("recovery.max_iter", "must be >= 1"));
        }
        if !(r.tol >= 0.0) {
            return Err(Error::config("recovery.tol", "must be >= 0"));
        }
        if let Some(s) = r.step {
            if !(s > 0.0) {
                return Err(Error::config("recovery.step", "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn k_above_n_names_field() {
        let err = ExperimentConfig::from_toml_str("[model]\nn = 4\nk = 8\n").unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "model.k"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ExperimentConfig::from_toml_str("[model]\nn = 4\nbogus = 1\n").unwrap_err();
        match err {
            Error::Config { field, message } => {
                assert_eq!(field, "line 3");
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_output_location() {
        let mut a = ExperimentConfig::default();
        let mut b = a.clone();
        a.experiment.out = Some("x".into());
        b.experiment.threads = Some(3);
        assert_eq!(a.config_hash(), b.config_hash());
        b.experiment.seed = 1;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::default();
        cfg.stack = vec![LayerSpec {
            n: 128,
            m: 64,
            activation: ActivationKind::Relu,
            slope: 1.0,
            a: 0.0,
            b: f64::INFINITY,
            seed: 2,
        }];
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn stack_dims_must_chain() {
        let text = "[[stack]]\nn = 128\nm = 64\nactivation = \"relu\"\n[[stack]]\nn = 32\nm = 8\nactivation = \"relu\"\n";
        assert!(matches!(
            ExperimentConfig::from_toml_str(text),
            Err(Error::Config { field, .. }) if field == "stack[1].n"
        ));
    }
}
