// Placing units into capacity-limited locations when some units must share
// a location, then scoring the plan under the true weights.
//
// ```text
// cargo run --example assignment
// ```

use proxyshift::assignment::{evaluate_impact, impact_gain, solve_assignment, AssignmentInstance};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // predicted gain of each unit at each of three locations
    let predicted = vec![
        vec![0.9, 0.2, 0.1],
        vec![0.8, 0.3, 0.0],
        vec![0.1, 0.7, 0.4],
        vec![0.2, 0.6, 0.5],
        vec![0.3, 0.1, 0.9],
    ];
    let truth = vec![
        vec![0.7, 0.3, 0.1],
        vec![0.9, 0.2, 0.1],
        vec![0.0, 0.8, 0.3],
        vec![0.1, 0.5, 0.6],
        vec![0.2, 0.2, 0.8],
    ];
    // units 0 and 2 are a family and move together
    let groups = ["fam", "b", "fam", "d", "e"].map(String::from).to_vec();
    let instance = AssignmentInstance::new(predicted, vec![2, 2, 1], groups)?;

    let plan = solve_assignment(&instance)?;
    println!("locations {:?}, predicted objective {:.2}", plan.location_of, plan.objective);
    println!("realised impact {:.2}", evaluate_impact(&plan, &truth)?);

    let oracle = solve_assignment(&AssignmentInstance { weights: truth.clone(), ..instance.clone() })?;
    println!("best possible {:.2}, gain of plan over it {:+.2}", oracle.objective, impact_gain(&plan, &oracle, &truth)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
