//! Greedy-net covering numbers before and after a random layer, checked
//! against the width-dependent shrinkage of the radius.
//!
//!     cargo run --release --example covering

use gaussnet::*;

fn main() -> Result<()> {
    let model = make_gmm_model(128, 4, 3, 7)?;
    let cloud = sample_points(&model, 200, 1)?;
    let pts = cloud.points();
    let width = estimate_mean_width(pts, 2000, 3)?.value;
    println!("width estimate {width:.3}");
    for m in [256, 1024] {
        let layer = make_layer(128, m, ActivationSpec::relu(), 2)?;
        let post = layer.apply_all(pts)?;
        for eps in [0.25, 0.5, 1.0] {
            let c = verify_covering_recursion(pts, &post, eps, width, m, 2.0)?;
            println!(
                "m={m:<5} eps={eps:<4} net_post={:<4} net_pre(r={:.3})={:<4} pass={}",
                c.net_size_post, c.shrunk_radius, c.net_size_pre, c.pass
            );
        }
    }
    let est = empirical_covering(pts, 0.5)?;
    println!("greedy 0.5-net of the input: {} of {} points", est.net_size, est.cloud_size);
    Ok(())
}
