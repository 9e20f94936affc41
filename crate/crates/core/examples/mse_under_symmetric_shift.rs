// Monte Carlo mean squared errors of A, B and C under two consecutive
// symmetric shifts, next to the closed-form prediction.
//
// The prediction drops a `kappa_m1 * kappa_m2` remainder, so expect
// agreement up to that bound plus Monte Carlo error.
//
// ```text
// cargo run --release --example mse_under_symmetric_shift
// ```

use proxyshift::dist::reference_joint;
use proxyshift::mc::{run_theorem1_experiment, ExperimentConfig};
use proxyshift::shift::ShiftSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::new(reference_joint(), ShiftSpec::symmetric(0.1), ShiftSpec::symmetric(0.05), 2000, 17);
    let report = run_theorem1_experiment(&cfg)?;
    for m in &report.methods {
        let theory = m.theoretical.map(|t| t.total()).unwrap_or(f64::NAN);
        println!("{:>8}: {:.5} +- {:.5}  predicted {:.5}", m.method.name(), m.empirical_mse, m.mc_standard_error, theory);
    }
    for o in &report.ordering {
        println!("C - {}: {:+.5} +- {:.5}", o.other.name(), o.mean_difference, o.se);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
