//! Pairwise-distance distortion of a GMM cloud pushed through one random
//! ReLU layer, for growing widths.
//!
//!     cargo run --release --example embedding

use gaussnet::metrics::{PostMetric, PreMetric};
use gaussnet::*;

fn main() -> Result<()> {
    let model = make_gmm_model(128, 4, 3, 7)?;
    let cloud = sample_points(&model, 200, 1)?;
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "m", "scale", "max_res", "mean_res", "spearman");
    for m in [64, 256, 1024, 4096] {
        let layer = make_layer(128, m, ActivationSpec::relu(), 2)?;
        let post = layer.apply_all(cloud.points())?;
        let r = distortion_report(cloud.points(), &post, PreMetric::Geodesic, PostMetric::HammingVariant)?;
        println!(
            "{m:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.scale_constant, r.max_residual, r.mean_residual, r.spearman
        );
    }

    // A three-layer stack, renormalizing onto the sphere between layers.
    let layers: Vec<_> = (0..3)
        .map(|l| make_layer(if l == 0 { 128 } else { 256 }, 256, ActivationSpec::relu(), 10 + l))
        .collect::<Result<_>>()?;
    let stages = forward_stack(&layers, cloud.points(), true)?;
    for (depth, pair) in stages.windows(2).enumerate() {
        let r = distortion_report(&pair[0].points, &pair[1].points, PreMetric::Geodesic, PostMetric::HammingVariant)?;
        println!("layer {}: spearman {:.4}", depth + 1, r.spearman);
    }
    Ok(())
}
