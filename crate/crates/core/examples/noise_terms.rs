// Conditional means, the fitted proxy scaling and the noise terms of a
// joint, then the closed-form error prediction for two shift strengths.
//
// ```text
// cargo run --example noise_terms
// ```

use proxyshift::dist::reference_joint;
use proxyshift::theory::theorem1_predict;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let joint = reference_joint();

    let tau = joint.cond_mean_y2_given_x();
    let q = joint.cond_mean_y2_given_y1_x();
    for (x, (label, v)) in tau.iter().enumerate() {
        println!("x={label}: E[Y2|X]={v:.3}  E[Y2|Y1=0,X]={:.3}  E[Y2|Y1=1,X]={:.3}", q.get(x, 0).unwrap(), q.get(x, 1).unwrap());
    }

    let scaling = joint.fit_proxy_scaling();
    let t = joint.noise_terms(&scaling);
    println!("scaling: slope {:.3}, intercept {:.3}", scaling.slope, scaling.intercept);
    println!("noise_full {:.4}  noise_x {:.4}  proxy_bias {:.4}  proxy_resid {:.4}", t.noise_full, t.noise_x, t.proxy_bias, t.proxy_resid);
    assert!(t.noise_full <= t.noise_x);

    for b in theorem1_predict(&joint, &scaling, 0.1, 0.05)? {
        println!("{:>8}: predicted MSE {:.5} (remainder bound {:.5})", b.method.name(), b.total(), b.cross_term_bound);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
