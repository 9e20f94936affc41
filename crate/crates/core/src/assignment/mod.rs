//! Capacity-constrained placement of units into locations.
//!
//! Units sharing a group token must share a location, capacities count units,
//! and the objective is the sum of `w[i][j]` over placed units. Groups are
//! collapsed into super-units whose weight row is the sum of their members'.
//!
//! The solver relaxes the problem to a transportation problem (min-cost flow
//! over units). When no group is split across locations that relaxation is
//! already optimal; otherwise a depth-first branch and bound over split
//! groups, bounded by the same flow relaxation, closes the gap.

mod flow;

use serde::Serialize;

use crate::error::{Error, Result};
use flow::MinCostFlow;

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentInstance {
    pub unit_labels: Vec<String>,
    pub location_labels: Vec<String>,
    /// `weights[i][j]`: value of placing unit `i` at location `j`.
    pub weights: Vec<Vec<f64>>,
    pub capacities: Vec<u64>,
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub location_of: Vec<usize>,
    pub objective: f64,
}

/// A group of units that must be placed together.
#[derive(Debug, Clone, PartialEq)]
struct SuperUnit {
    label: String,
    members: Vec<usize>,
    weights: Vec<f64>,
}

impl AssignmentInstance {
    /// Instance with labels `0..n` for units and locations.
    pub fn new(weights: Vec<Vec<f64>>, capacities: Vec<u64>, groups: Vec<String>) -> Result<Self> {
        let unit_labels = (0..weights.len()).map(|i| i.to_string()).collect();
        let location_labels = (0..capacities.len()).map(|j| j.to_string()).collect();
        Self::labelled(unit_labels, location_labels, weights, capacities, groups)
    }

    /// Instance where every unit is its own group.
    pub fn ungrouped(weights: Vec<Vec<f64>>, capacities: Vec<u64>) -> Result<Self> {
        let groups = (0..weights.len()).map(|i| format!("u{i}")).collect();
        Self::new(weights, capacities, groups)
    }

    pub fn labelled(
        unit_labels: Vec<String>,
        location_labels: Vec<String>,
        weights: Vec<Vec<f64>>,
        capacities: Vec<u64>,
        groups: Vec<String>,
    ) -> Result<Self> {
        let (n, l) = (weights.len(), capacities.len());
        if unit_labels.len() != n || groups.len() != n || location_labels.len() != l {
            return Err(Error::DimensionMismatch(format!(
                "{n} weight rows, {} unit labels, {} groups, {l} capacities, {} location labels",
                unit_labels.len(),
                groups.len(),
                location_labels.len()
            )));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != l {
                return Err(Error::DimensionMismatch(format!("weight row {i} has {} entries, expected {l}", row.len())));
            }
            if row.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite weight in row {i}")));
            }
        }
        Ok(AssignmentInstance { unit_labels, location_labels, weights, capacities, groups })
    }

    pub fn n_units(&self) -> usize {
        self.weights.len()
    }

    pub fn n_locations(&self) -> usize {
        self.capacities.len()
    }

    /// Groups in order of first appearance.
    fn super_units(&self) -> Vec<SuperUnit> {
        let mut out: Vec<SuperUnit> = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            let k = match out.iter().position(|s| &s.label == g) {
                Some(k) => k,
                None => {
                    out.push(SuperUnit { label: g.clone(), members: Vec::new(), weights: vec![0.0; self.n_locations()] });
                    out.len() - 1
                }
            };
            out[k].members.push(i);
            for (a, w) in out[k].weights.iter_mut().zip(&self.weights[i]) {
                *a += w;
            }
        }
        out
    }

    fn check_feasible(&self, units: &[SuperUnit]) -> Result<()> {
        let total: u64 = self.capacities.iter().sum();
        if (self.n_units() as u64) > total {
            return Err(Error::Infeasible {
                group: None,
                reason: format!("{} units exceed total capacity {total}", self.n_units()),
            });
        }
        let max_cap = self.capacities.iter().copied().max().unwrap_or(0);
        if let Some(g) = units.iter().find(|g| g.members.len() as u64 > max_cap) {
            return Err(Error::Infeasible {
                group: Some(g.label.clone()),
                reason: format!("group of {} exceeds the largest capacity {max_cap}", g.members.len()),
            });
        }
        Ok(())
    }

    /// `sum_i weights[i][location_of[i]]`, summed in unit order.
    pub fn objective(&self, location_of: &[usize]) -> f64 {
        location_of.iter().enumerate().map(|(i, &j)| self.weights[i][j]).sum()
    }

    /// Checks capacities and co-location of a candidate assignment.
    pub fn is_feasible(&self, location_of: &[usize]) -> bool {
        if location_of.len() != self.n_units() || location_of.iter().any(|&j| j >= self.n_locations()) {
            return false;
        }
        let mut load = vec![0u64; self.n_locations()];
        for &j in location_of {
            load[j] += 1;
        }
        let caps_ok = load.iter().zip(&self.capacities).all(|(l, c)| l <= c);
        caps_ok && self.super_units().iter().all(|g| g.members.iter().all(|&i| location_of[i] == location_of[g.members[0]]))
    }

    fn expand(&self, units: &[SuperUnit], placement: &[usize]) -> Assignment {
        let mut location_of = vec![0; self.n_units()];
        for (g, &j) in units.iter().zip(placement) {
            for &i in &g.members {
                location_of[i] = j;
            }
        }
        let objective = self.objective(&location_of);
        Assignment { location_of, objective }
    }
}

/// Flow relaxation over the free groups. Returns the bound on their total
/// weight and each free group's unit flow per location, or `None` if even
/// the relaxation is infeasible.
fn relaxation(units: &[SuperUnit], free: &[usize], caps: &[u64]) -> Option<(f64, Vec<Vec<u64>>)> {
    let l = caps.len();
    let g = free.len();
    let (src, sink) = (0, g + l + 1);
    let mut f = MinCostFlow::new(g + l + 2);
    // per-unit value of a group at a location, shifted to non-negative cost
    let per_unit = |k: usize, j: usize| units[free[k]].weights[j] / units[free[k]].members.len() as f64;
    let top = (0..g).flat_map(|k| (0..l).map(move |j| (k, j))).map(|(k, j)| per_unit(k, j)).fold(f64::NEG_INFINITY, f64::max);
    let mut arcs = vec![vec![usize::MAX; l]; g];
    let mut demand = 0;
    for k in 0..g {
        let size = units[free[k]].members.len() as u64;
        demand += size;
        f.add_edge(src, 1 + k, size, 0.0);
        for j in 0..l {
            if caps[j] >= size {
                arcs[k][j] = f.add_edge(1 + k, 1 + g + j, size, top - per_unit(k, j));
            }
        }
    }
    for (j, &c) in caps.iter().enumerate() {
        f.add_edge(1 + g + j, sink, c, 0.0);
    }
    if f.run(src, sink, demand) < demand {
        return None;
    }
    let flows: Vec<Vec<u64>> =
        arcs.iter().map(|row| row.iter().map(|&e| if e == usize::MAX { 0 } else { f.flow_on(e) }).collect()).collect();
    let value = flows
        .iter()
        .enumerate()
        .map(|(k, row)| row.iter().enumerate().map(|(j, &x)| x as f64 * per_unit(k, j)).sum::<f64>())
        .sum();
    Some((value, flows))
}

struct Search<'a> {
    units: &'a [SuperUnit],
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn visit(&mut self, placement: &mut Vec<Option<usize>>, caps: &mut Vec<u64>, fixed_value: f64) {
        let free: Vec<usize> = (0..self.units.len()).filter(|&k| placement[k].is_none()).collect();
        let Some((bound, flows)) = relaxation(self.units, &free, caps) else {
            return;
        };
        let total = fixed_value + bound;
        if let Some((best, _)) = &self.best {
            if total <= best + 1e-12 * (1.0 + best.abs()) {
                return;
            }
        }
        let split = flows.iter().position(|row| row.iter().filter(|&&x| x > 0).count() > 1);
        let Some(k) = split else {
            let mut full: Vec<usize> = placement.iter().map(|p| p.unwrap_or(usize::MAX)).collect();
            for (idx, row) in free.iter().zip(&flows) {
                full[*idx] = row.iter().position(|&x| x > 0).expect("every free group carries flow");
            }
            // fixed_value + bound is exact here, but recompute in a fixed order
            let value: f64 = full.iter().enumerate().map(|(g, &j)| self.units[g].weights[j]).sum();
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, full));
            }
            return;
        };
        let g = free[k];
        let size = self.units[g].members.len() as u64;
        let mut order: Vec<usize> = (0..caps.len()).filter(|&j| caps[j] >= size).collect();
        // most promising branch first
        order.sort_by(|&a, &b| flows[k][b].cmp(&flows[k][a]).then(a.cmp(&b)));
        for j in order {
            placement[g] = Some(j);
            caps[j] -= size;
            self.visit(placement, caps, fixed_value + self.units[g].weights[j]);
            caps[j] += size;
            placement[g] = None;
        }
    }
}

/// Exact maximum-weight feasible assignment.
pub fn solve_assignment(instance: &AssignmentInstance) -> Result<Assignment> {
    let units = instance.super_units();
    instance.check_feasible(&units)?;
    if units.is_empty() {
        return Ok(Assignment { location_of: Vec::new(), objective: 0.0 });
    }
    let mut search = Search { units: &units, best: None };
    search.visit(&mut vec![None; units.len()], &mut instance.capacities.clone(), 0.0);
    match search.best {
        Some((_, placement)) => Ok(instance.expand(&units, &placement)),
        None => Err(Error::Infeasible { group: None, reason: "no placement keeps every group together within capacity".into() }),
    }
}

/// Exhaustive search over group placements, for testing. Among optimal
/// placements the lexicographically smallest (first group most significant)
/// is returned.
pub fn brute_force_assignment(instance: &AssignmentInstance) -> Result<Assignment> {
    let units = instance.super_units();
    let l = instance.n_locations();
    if units.len() > 8 || l > 5 {
        return Err(Error::InstanceTooLarge(format!("{} groups x {l} locations", units.len())));
    }
    instance.check_feasible(&units)?;
    if units.is_empty() {
        return Ok(Assignment { location_of: Vec::new(), objective: 0.0 });
    }
    let mut placement = vec![0usize; units.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut load = vec![0u64; l];
        for (g, &j) in units.iter().zip(&placement) {
            load[j] += g.members.len() as u64;
        }
        if load.iter().zip(&instance.capacities).all(|(a, c)| a <= c) {
            let a = instance.expand(&units, &placement);
            if best.as_ref().is_none_or(|(b, _)| a.objective > *b) {
                best = Some((a.objective, placement.clone()));
            }
        }
        // lexicographic successor, last group least significant
        let mut k = units.len();
        loop {
            if k == 0 {
                return match best {
                    Some((_, p)) => Ok(instance.expand(&units, &p)),
                    None => Err(Error::Infeasible { group: None, reason: "no feasible placement".into() }),
                };
            }
            k -= 1;
            placement[k] += 1;
            if placement[k] < l {
                break;
            }
            placement[k] = 0;
        }
    }
}

/// Total true weight collected by `assignment`.
pub fn evaluate_impact(assignment: &Assignment, truth_weights: &[Vec<f64>]) -> Result<f64> {
    if truth_weights.len() != assignment.location_of.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} truth rows for {} units",
            truth_weights.len(),
            assignment.location_of.len()
        )));
    }
    assignment
        .location_of
        .iter()
        .zip(truth_weights)
        .map(|(&j, row)| row.get(j).copied().ok_or_else(|| Error::DimensionMismatch(format!("no truth weight for location {j}"))))
        .sum()
}

/// Impact of `assignment` minus that of `baseline` under the same truth.
pub fn impact_gain(assignment: &Assignment, baseline: &Assignment, truth_weights: &[Vec<f64>]) -> Result<f64> {
    Ok(evaluate_impact(assignment, truth_weights)? - evaluate_impact(baseline, truth_weights)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn groups(tokens: &[&str]) -> Vec<String> {
        tokens.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn diagonal_instance() {
        let inst = AssignmentInstance::ungrouped(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1, 1]).unwrap();
        let a = solve_assignment(&inst).unwrap();
        assert_eq!(a.location_of, vec![0, 1]);
        assert_eq!(a.objective, 2.0);
        assert_eq!(brute_force_assignment(&inst).unwrap().objective, 2.0);
    }

    #[test]
    fn group_forced_to_the_larger_location() {
        let inst = AssignmentInstance::new(vec![vec![5.0, 1.0], vec![4.0, 2.0]], vec![1, 2], groups(&["f", "f"])).unwrap();
        let a = solve_assignment(&inst).unwrap();
        assert_eq!(a.location_of, vec![1, 1]);
        assert_eq!(a.objective, 3.0);
    }

    #[test]
    fn empty_and_single() {
        let empty = AssignmentInstance::ungrouped(vec![], vec![]).unwrap();
        assert_eq!(brute_force_assignment(&empty).unwrap().objective, 0.0);
        assert_eq!(solve_assignment(&empty).unwrap().objective, 0.0);
        let one = AssignmentInstance::ungrouped(vec![vec![0.7]], vec![1]).unwrap();
        assert_eq!(brute_force_assignment(&one).unwrap().location_of, vec![0]);
        assert_eq!(solve_assignment(&one).unwrap().location_of, vec![0]);
    }

    #[test]
    fn infeasible_instances() {
        let too_many = AssignmentInstance::ungrouped(vec![vec![1.0]; 3], vec![2]).unwrap();
        assert!(matches!(solve_assignment(&too_many), Err(Error::Infeasible { group: None, .. })));
        let big_group = AssignmentInstance::new(vec![vec![1.0, 1.0]; 3], vec![2, 2], groups(&["g", "g", "g"])).unwrap();
        assert!(matches!(solve_assignment(&big_group), Err(Error::Infeasible { group: Some(_), .. })));
        // packing: two pairs into capacities (3, 1)
        let packing = AssignmentInstance::new(vec![vec![1.0, 1.0]; 4], vec![3, 1], groups(&["a", "a", "b", "b"])).unwrap();
        assert!(matches!(solve_assignment(&packing), Err(Error::Infeasible { .. })));
        assert!(matches!(brute_force_assignment(&packing), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn brute_force_size_limit() {
        let inst = AssignmentInstance::ungrouped(vec![vec![0.0; 2]; 9], vec![9, 9]).unwrap();
        assert!(matches!(brute_force_assignment(&inst), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn relaxation_split_needs_branching() {
        // the relaxation would split group "p" across both locations
        let w = vec![vec![4.0, 0.0], vec![4.0, 0.0], vec![3.0, 0.0], vec![0.0, 1.0]];
        let inst = AssignmentInstance::new(w, vec![2, 2], groups(&["p", "p", "s", "t"])).unwrap();
        let a = solve_assignment(&inst).unwrap();
        assert!(inst.is_feasible(&a.location_of));
        assert_eq!(a.objective, brute_force_assignment(&inst).unwrap().objective);
        assert_eq!(a.objective, 9.0);
    }

    #[test]
    fn matches_brute_force_on_random_grouped_instances() {
        let mut rng = stream_rng(77, 0);
        for _ in 0..300 {
            let n = rng.random_range(1..=6);
            let l = rng.random_range(1..=4);
            let w: Vec<Vec<f64>> = (0..n).map(|_| (0..l).map(|_| rng.random_range(-64..=64) as f64 / 64.0).collect()).collect();
            let caps: Vec<u64> = (0..l).map(|_| rng.random_range(0..=4)).collect();
            let g: Vec<String> = (0..n).map(|_| format!("g{}", rng.random_range(0..4))).collect();
            let inst = AssignmentInstance::new(w, caps, g).unwrap();
            match (solve_assignment(&inst), brute_force_assignment(&inst)) {
                (Ok(a), Ok(b)) => {
                    assert!(inst.is_feasible(&a.location_of));
                    assert_eq!(a.objective, b.objective, "{inst:?}");
                }
                (Err(e1), Err(e2)) => assert_eq!(e1.code(), e2.code()),
                (a, b) => panic!("solver {a:?} vs brute force {b:?} on {inst:?}"),
            }
        }
    }

    #[test]
    fn impact_of_own_weights_is_the_objective() {
        let inst = AssignmentInstance::ungrouped(vec![vec![1.0, 2.0], vec![3.0, 0.5]], vec![1, 1]).unwrap();
        let a = solve_assignment(&inst).unwrap();
        assert_eq!(evaluate_impact(&a, &inst.weights).unwrap(), a.objective);
        assert_eq!(evaluate_impact(&a, &[vec![1.5; 2], vec![1.5; 2]]).unwrap(), 3.0);
        assert!(evaluate_impact(&a, &[vec![1.0; 2]]).is_err());
        let base = Assignment { location_of: vec![0, 1], objective: 1.5 };
        assert_eq!(impact_gain(&a, &base, &inst.weights).unwrap(), 5.0 - 1.5);
    }
}
