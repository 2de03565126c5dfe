//! Which activations count as semi-truncated linear.
//!
//!     cargo run --example activations

use gaussnet::netsim::validate_activation;
use gaussnet::*;

fn main() -> Result<()> {
    let specs = [
        ("relu", ActivationSpec::relu()),
        ("identity", ActivationSpec::identity()),
        ("0.5*clamp(x,-1,1)", ActivationSpec::truncated(0.5, -1.0, 1.0)?),
        ("clamp(x,0,2)", ActivationSpec::truncated(1.0, 0.0, 2.0)?),
    ];
    for (name, spec) in specs {
        println!("{name:<20} {:?}", validate_activation(&spec, 400)?);
    }
    let others: [(&str, fn(f64) -> f64); 3] = [
        ("2*relu", |x| 2.0 * x.max(0.0)),
        ("relu+0.1", |x| x.max(0.0) + 0.1),
        ("tanh", f64::tanh),
    ];
    for (name, f) in others {
        println!("{name:<20} pass={}", validate_semi_truncated(f, 400)?.all_pass());
    }
    println!("slope 2 rejected: {}", ActivationSpec::truncated(2.0, -1.0, 1.0).is_err());
    Ok(())
}
