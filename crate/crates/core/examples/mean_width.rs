//! Monte Carlo mean width of a sampled GMM cloud next to the closed-form
//! bound and the entropy integral.
//!
//!     cargo run --release --example mean_width

use gaussnet::width::{dudley_bound, gmm_covering_fn, DEFAULT_RADIUS_MAX};
use gaussnet::*;

fn main() -> Result<()> {
    println!("{:>3} {:>3} {:>10} {:>8} {:>10} {:>9}", "k", "L", "estimate", "stderr", "sqrt(k+lnL)", "integral");
    for (k, l) in [(2, 1), (4, 3), (8, 9)] {
        let model = make_gmm_model(128, k, l, 7)?;
        let cloud = sample_points(&model, 512, 1)?;
        let est = estimate_mean_width(cloud.points(), 2000, 2)?;
        let bound = mean_width_gmm_bound(k, l, 1.0)?;
        let integral = dudley_bound(gmm_covering_fn(l, k), DEFAULT_RADIUS_MAX, 1.0)?;
        println!(
            "{k:>3} {l:>3} {:>10.4} {:>8.4} {bound:>10.4} {integral:>9.4}",
            est.value, est.std_error
        );
    }
    Ok(())
}
