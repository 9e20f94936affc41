// Error curves as covariates are shuffled further, for a weak and a strong
// proxy. An intercept-only baseline is reported alongside A, B and C.
//
// ```text
// cargo run --release --example permutation_benchmark
// ```

use proxyshift::mc::{run_permutation_benchmark, BenchmarkData, PermutationConfig, BENCH_METHODS};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PermutationConfig {
        data: BenchmarkData::ProxyStrengths(vec![0.3, 0.9]),
        shift_grid: vec![0.0, 0.5, 1.0],
        n_splits: 40,
        n_rows: 3000,
        seed: 8,
    };
    let report = run_permutation_benchmark(&cfg)?;
    println!("{:>8} {:>6} {}", "strength", "shift", BENCH_METHODS.map(|m| format!("{m:>10}")).join(""));
    for p in &report.points {
        let mse: String = p.mse.iter().map(|m| format!("{:>10.5}", m.mean)).collect();
        println!("{:>8} {:>6} {mse}", p.proxy_strength.unwrap_or(f64::NAN), p.shift);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
