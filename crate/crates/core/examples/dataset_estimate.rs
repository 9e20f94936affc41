// Period CSV files in, predictions out: draw period -2 and -1 samples,
// write them to disk, load them back with a shared alphabet and fit the
// plug-in predictors. Then shuffle covariates to fake an older, drifted
// period and refit.
//
// ```text
// cargo run --example dataset_estimate
// ```

use proxyshift::estimators::{fit_proxy_scaling_empirical, hat_tau_a, hat_tau_b, hat_tau_c};
use proxyshift::io::{load_datasets, save_dataset};
use proxyshift::mc::proxy_strength_joint;
use proxyshift::rng::stream_rng;
use proxyshift::samples::{draw_period, PERIOD_FULL, PERIOD_PROXY};
use proxyshift::shift::permute_covariates;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let joint = proxy_strength_joint(0.8)?;
    let dir = std::env::temp_dir().join(format!("proxyshift-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (m2_path, m1_path) = (dir.join("m2.csv"), dir.join("m1.csv"));

    let mut rng = stream_rng(12, 0);
    save_dataset(&draw_period(&joint, PERIOD_FULL, 5000, &mut rng)?, &m2_path)?;
    save_dataset(&draw_period(&joint, PERIOD_PROXY, 5000, &mut rng)?, &m1_path)?;

    let sets = load_datasets(&[&m2_path, &m1_path])?;
    let train = sets[0].concat(&sets[1])?;
    let scaling = fit_proxy_scaling_empirical(&train)?;
    let a = hat_tau_a(&train)?;
    let b = hat_tau_b(&train, &scaling)?;
    let c = hat_tau_c(&train)?;
    let truth = joint.cond_mean_y2_given_x();
    for (x, label) in train.alphabet().x_labels().iter().enumerate() {
        println!("x={label}: truth {:.4}  A {:.4}  B {:.4}  C {:.4}", truth.get(x), a.get(x), b.get(x), c.table.get(x));
    }

    // full shuffle: covariates lose all information about the outcomes
    let drifted = permute_covariates(&sets[0], 1.0, 1, &mut rng)?;
    let a_drifted = hat_tau_a(&drifted)?;
    let c_drifted = hat_tau_c(&drifted.concat(&sets[1])?)?;
    for x in 0..joint.nx() {
        println!("shuffled x={x}: A {:.4}  C {:.4}", a_drifted.get(x), c_drifted.table.get(x));
    }

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
