//! Random Gaussian-weight network layers and empirical checks of the
//! geometry they preserve.
//!
//! * [`models`]: GMM / union-of-subspaces data on the unit sphere.
//! * [`width`]: Monte Carlo Gaussian mean width and closed-form bounds
//!   (GMM covering numbers, Dudley's entropy integral, Sudakov net sizes,
//!   per-layer covering recursion).
//! * [`netsim`]: random layers `x ↦ f(Mx)` with semi-truncated linear
//!   activations, and layer stacks.
//! * [`metrics`]: sign-pattern (Hamming-variant) and angular distances,
//!   distortion reports, greedy ε-nets.
//! * [`recovery`]: reconstructing a layer input from its output.
//! * [`harness`]: config-driven experiments writing CSV artifacts.
//!
//! All randomness comes from [`rng`], a counter-based generator, so every
//! result is a pure function of its seeds regardless of thread count.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod netsim;
pub mod recovery;
pub mod rng;
pub mod width;

pub use error::{Error, Result};
pub use metrics::{
    distortion_report, empirical_covering, geodesic_distance, hamming_variant, verify_covering_recursion,
    CoveringCheck, CoveringEstimate, DistortionReport, PostMetric, PreMetric,
};
pub use models::{make_gmm_model, make_union_of_subspaces, sample_points, ManifoldModel, ModelKind, PointCloud};
pub use netsim::{
    apply_layer, forward_stack, make_layer, validate_semi_truncated, ActivationKind, ActivationSpec, RandomLayer,
};
pub use recovery::{recover_iterative, recover_linear, recovery_error_sweep, RecoveryMethod, RecoveryResult};
pub use width::{
    covering_number_gmm, dudley_bound, estimate_mean_width, layer_covering_recursion, mean_width_gmm_bound,
    sudakov_net_size, CoveringBound, MeanWidthEstimate,
};
