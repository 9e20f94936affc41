// The three predictors on population joints after a shift of the recent
// period, and the nested predictor over a chain of three outcomes.
//
// ```text
// cargo run --example estimators
// ```

use proxyshift::dist::{integer_levels, reference_joint};
use proxyshift::estimators::{tau_a, tau_b, tau_c, tau_nested, ChainJoint};
use proxyshift::rng::stream_rng;
use proxyshift::shift::sample_symmetric_shift;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let old = reference_joint();
    let (_, recent) = sample_symmetric_shift(&old, 0.3, &mut stream_rng(5, 0))?;
    let (_, target) = sample_symmetric_shift(&recent, 0.3, &mut stream_rng(5, 1))?;

    let scaling = old.fit_proxy_scaling();
    let truth = target.cond_mean_y2_given_x();
    let a = tau_a(&old);
    let b = tau_b(&recent, &scaling);
    let c = tau_c(&old, &recent)?;
    println!("{:>4} {:>8} {:>8} {:>8} {:>8}", "x", "truth", "A", "B", "C");
    for x in 0..old.nx() {
        println!("{:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", old.alphabet().x_labels()[x], truth.get(x), a.get(x), b.get(x), c.table.get(x));
    }
    let w = target.px();
    println!(
        "squared error: A {:.5}, B {:.5}, C {:.5}",
        a.weighted_sq_error(&truth, w),
        b.weighted_sq_error(&truth, w),
        c.table.weighted_sq_error(&truth, w)
    );

    // period -t sees outcomes Y_1..Y_t; here each period has its own chain
    let levels = vec![integer_levels(2), integer_levels(2), integer_levels(2)];
    let chain = |table: Vec<f64>| ChainJoint::new(vec!["u".into()], levels.clone(), vec![1.0], vec![table]);
    let p3 = chain(vec![0.20, 0.05, 0.05, 0.10, 0.10, 0.05, 0.05, 0.40])?;
    let p2 = chain(vec![0.10, 0.10, 0.05, 0.05, 0.05, 0.05, 0.20, 0.40])?;
    let p1 = chain(vec![0.05, 0.05, 0.05, 0.05, 0.10, 0.10, 0.20, 0.40])?;
    let joints = [p1.truncate(1)?, p2.truncate(2)?, p3];
    for (t1, t2) in [(1, 2), (2, 3), (1, 3)] {
        let n = tau_nested(&joints, t1, t2)?;
        println!("nested {t1}-{t2}: {:.4}", n.table.get(0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
