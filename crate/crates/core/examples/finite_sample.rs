// Sampling variability of the plug-in estimators with no shift, against
// their asymptotic variances.
//
// The proxy variance is only meaningful when `E[Y2 | Y1, X]` is affine, so
// the caller states it. With one covariate and a binary proxy that always
// holds.
//
// ```text
// cargo run --release --example finite_sample
// ```

use proxyshift::dist::{Alphabet, ConditionalJoint};
use proxyshift::mc::{run_finite_sample_experiment, FiniteSampleConfig};
use proxyshift::theory::linear_proxy_beta;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let joint = ConditionalJoint::new(Alphabet::integer(1, 2, 2)?, vec![1.0], vec![vec![0.4, 0.1, 0.1, 0.4]])?;
    let cfg = FiniteSampleConfig {
        linear_proxy_beta: linear_proxy_beta(&joint),
        joint,
        x: 0,
        n_m2: 4000,
        n_m1: 8000,
        n_reps: 300,
        seed: 31,
        assert_linear_proxy: true,
    };
    let report = run_finite_sample_experiment(&cfg)?;
    println!("n = {}, rho = {}", report.n_total, report.oracle.rho);
    for r in &report.rows {
        println!(
            "{:>8}: n*Var {:.4} +- {:.4}  asymptotic {}",
            r.method.name(),
            r.n_var.mean,
            r.n_var.se,
            r.oracle.map_or("-".into(), |v| format!("{v:.4}"))
        );
    }
    if let Some(b) = report.proxy_bias {
        println!("rescaled proxy bias {:.5} +- {:.5} (population {:.5})", b.empirical.mean, b.empirical.se, b.population);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
