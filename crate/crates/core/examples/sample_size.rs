//! How many samples a GMM needs: width bound, then the net size it implies.
//!
//!     cargo run --example sample_size

use gaussnet::*;

fn main() -> Result<()> {
    for (k, l) in [(2, 3), (4, 3), (8, 16)] {
        let w = mean_width_gmm_bound(k, l, 1.0)?;
        for eps in [0.5, 1.0] {
            let n = sudakov_net_size(w, eps, 1.0)?;
            let cover = covering_number_gmm(l, k, eps)?.value;
            println!("k={k} L={l} eps={eps}: width bound {w:.3}, net size {n:.3e}, volumetric cover {cover:.3e}");
        }
    }
    Ok(())
}
