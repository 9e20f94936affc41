// When shifts only move the proxy marginal, the hybrid predictor keeps the
// recent proxy information without picking up the first-stage drift.
//
// ```text
// cargo run --release --example mse_under_proxy_shift
// ```

use proxyshift::dist::reference_joint;
use proxyshift::mc::{run_theorem2_experiment, ExperimentConfig};
use proxyshift::shift::ShiftSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ShiftSpec::asymmetric(0.3);
    let report = run_theorem2_experiment(&ExperimentConfig::new(reference_joint(), spec, spec, 1000, 23))?;
    for m in &report.methods {
        println!("{:>8}: {:.5} +- {:.5}", m.method.name(), m.empirical_mse, m.mc_standard_error);
    }

    // a generator that also moves E[Y2 | Y1, X] is refused
    let symmetric = ShiftSpec::symmetric(0.1);
    let err = run_theorem2_experiment(&ExperimentConfig::new(reference_joint(), symmetric, symmetric, 1000, 23)).unwrap_err();
    println!("symmetric generator: {err}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
