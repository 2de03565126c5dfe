//! Recovering a GMM point from one ReLU layer's output, then the error
//! versus width sweep.
//!
//!     cargo run --release --example recovery

use gaussnet::recovery::{IterativeOptions, SweepOptions};
use gaussnet::*;

fn main() -> Result<()> {
    let model = make_gmm_model(128, 4, 3, 7)?;
    let x = sample_points(&model, 1, 5)?.into_points().remove(0);
    let layer = make_layer(128, 1024, ActivationSpec::relu(), 6)?;
    let q = layer.apply(&x)?;

    let lin = recover_linear(&layer, &q, &model)?.with_truth(&x, &model);
    let it = recover_iterative(&layer, &q, &model, &lin, IterativeOptions::default())?.with_truth(&x, &model);
    for r in [&lin, &it] {
        println!(
            "{:<20} component {} residual {:.3e} error {:.3e} ({} iterations)",
            r.method.name(),
            r.component_index,
            r.residual,
            r.error.unwrap_or(f64::NAN),
            r.iterations
        );
    }

    let opts = SweepOptions {
        activation: ActivationSpec::relu(),
        iterative: Some(IterativeOptions::default()),
    };
    let table = recovery_error_sweep(&model, 1, &[64, 256, 1024, 4096], 20, opts)?;
    for s in &table.summaries {
        let med: Vec<String> = s.medians.iter().map(|(m, e)| format!("{m}:{e:.3e}")).collect();
        println!("{:<20} {}  slope {:?}", s.method.name(), med.join(" "), s.slope);
    }
    Ok(())
}
