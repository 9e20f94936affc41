//! Invariants over randomly generated joints, shifts, samples and
//! assignment instances.

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use proxyshift::assignment::{brute_force_assignment, evaluate_impact, solve_assignment, AssignmentInstance};
use proxyshift::dist::{Alphabet, ConditionalJoint, Level};
use proxyshift::estimators::{tau_a, tau_c, tau_nested, ChainJoint};
use proxyshift::io::{fmt_num, read_dataset, write_dataset, JointInput, JointSpec};
use proxyshift::samples::{SampleRow, SampleSet};
use proxyshift::shift::{sample_asymmetric_shift, sample_symmetric_shift};

/// Positive weights, normalised.
fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn levels(k: usize, tag: &'static str) -> impl Strategy<Value = Vec<Level>> {
    prop::collection::vec(0.1f64..3.0, k).prop_map(move |steps| {
        let mut v = -1.0;
        steps.into_iter().enumerate().map(|(i, s)| {
            v += s;
            Level::new(format!("{tag}{i}"), v)
        }).collect()
    })
}

fn joint_with(a: Alphabet) -> impl Strategy<Value = ConditionalJoint> {
    let (nx, k) = (a.nx(), a.cells_per_x());
    (simplex(nx), prop::collection::vec(simplex(k), nx))
        .prop_map(move |(px, rows)| ConditionalJoint::new(a.clone(), px, rows).unwrap())
}

fn alphabet() -> impl Strategy<Value = Alphabet> {
    (1usize..4, 2usize..4, 2usize..4).prop_flat_map(|(nx, n1, n2)| {
        (levels(n1, "a"), levels(n2, "b"))
            .prop_map(move |(l1, l2)| Alphabet::new((0..nx).map(|i| format!("x{i}")).collect(), l1, l2).unwrap())
    })
}

fn joint() -> impl Strategy<Value = ConditionalJoint> {
    alphabet().prop_flat_map(joint_with)
}

/// Two joints on one alphabet.
fn joint_pair() -> impl Strategy<Value = (ConditionalJoint, ConditionalJoint)> {
    alphabet().prop_flat_map(|a| (joint_with(a.clone()), joint_with(a)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tower_law(j in joint()) {
        let q = j.cond_mean_y2_given_y1_x();
        let m = j.cond_mean_y2_given_x();
        for x in 0..j.nx() {
            let p1 = j.y1_marginal(x);
            let v: f64 = (0..p1.len()).map(|i| p1[i] * q.get(x, i).unwrap()).sum();
            prop_assert!((v - m.get(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioning_reduces_noise(j in joint()) {
        let t = j.noise_terms(&j.fit_proxy_scaling());
        prop_assert!(t.noise_full <= t.noise_x + 1e-15);
        prop_assert!(t.noise_full <= t.proxy_resid + t.proxy_bias + 1e-12);
    }

    #[test]
    fn hybrid_without_shift_is_standard(j in joint()) {
        let c = tau_c(&j, &j).unwrap();
        prop_assert!(!c.any_flagged());
        prop_assert!(c.table.max_abs_diff(&tau_a(&j)) < 1e-12);
    }

    #[test]
    fn hybrid_is_an_average_of_first_stage_means((m2, m1) in joint_pair()) {
        let q = m2.cond_mean_y2_given_y1_x();
        let c = tau_c(&m2, &m1).unwrap().table;
        for x in 0..m2.nx() {
            let (lo, hi) = q.row(x).iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            prop_assert!(c.get(x) >= lo - 1e-12 && c.get(x) <= hi + 1e-12);
        }
    }

    #[test]
    fn nested_two_periods_is_hybrid((m2, m1) in joint_pair()) {
        let chains = [ChainJoint::from_joint(&m1).truncate(1).unwrap(), ChainJoint::from_joint(&m2)];
        let nested = tau_nested(&chains, 1, 2).unwrap();
        let c = tau_c(&m2, &m1).unwrap();
        prop_assert!(nested.table.max_abs_diff(&c.table) < 1e-12);
        prop_assert_eq!(nested.flagged, c.flagged);
    }

    #[test]
    fn symmetric_shift_stays_on_simplex(j in joint(), kappa in 0.01f64..0.99, seed in any::<u64>()) {
        let (draw, shifted) = sample_symmetric_shift(&j, kappa, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(draw.satisfies_constraints(&j));
        prop_assert_eq!(shifted.px(), j.px());
        for x in 0..j.nx() {
            prop_assert!((shifted.row(x).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_shift_keeps_outcome_conditional(j in joint(), scale in 0.01f64..0.99, seed in any::<u64>()) {
        let (draw, shifted) = sample_asymmetric_shift(&j, scale, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(draw.satisfies_constraints(&j));
        let (q0, q1) = (j.cond_mean_y2_given_y1_x(), shifted.cond_mean_y2_given_y1_x());
        for x in 0..j.nx() {
            for i in 0..j.alphabet().n1() {
                if let (Some(a), Some(b)) = (q0.get(x, i), q1.get(x, i)) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn joint_spec_round_trips(j in joint()) {
        let json = serde_json::to_string(&JointInput::Explicit(JointSpec::from_joint(&j))).unwrap();
        let back = serde_json::from_str::<JointInput>(&json).unwrap().resolve().unwrap();
        // re-validation may rescale rows that sum to one within an ulp
        prop_assert_eq!(back.alphabet(), j.alphabet());
        prop_assert!(back.max_abs_diff(&j) <= 1e-15);
    }

    #[test]
    fn number_format_keeps_fifteen_digits(v in prop::num::f64::NORMAL) {
        let back: f64 = fmt_num(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-15 * v.abs());
    }
}

fn dataset() -> impl Strategy<Value = SampleSet> {
    (1usize..4, prop::collection::vec(-4i32..5, 1..4), prop::collection::vec(-4i32..5, 1..4)).prop_flat_map(|(nx, v1, v2)| {
        let mk = |v: Vec<i32>| {
            let mut v: Vec<f64> = v.into_iter().map(|k| k as f64 / 8.0).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v.into_iter().map(|x| Level::new(fmt_num(x), x)).collect::<Vec<_>>()
        };
        let a = Arc::new(Alphabet::new((0..nx).map(|i| format!("c{i}")).collect(), mk(v1), mk(v2)).unwrap());
        let (n1, n2) = (a.n1(), a.n2());
        let row = (-2i32..=0, 0..nx, 0..n1, 0..n2).prop_map(|(period, x, y1, y2)| SampleRow {
            period,
            x,
            y1: (period <= -1).then_some(y1),
            y2: (period == -2).then_some(y2),
        });
        prop::collection::vec(row, 1..40).prop_map(move |rows| SampleSet::new(a.clone(), rows).unwrap())
    })
}

/// Grouped instance with dyadic weights so that objective sums are exact.
fn instance() -> impl Strategy<Value = AssignmentInstance> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(n, l)| {
        (
            prop::collection::vec(prop::collection::vec(-64i32..=64, l), n),
            prop::collection::vec(0u64..=4, l),
            prop::collection::vec(0usize..4, n),
        )
            .prop_map(|(w, caps, g)| {
                let w = w.into_iter().map(|r| r.into_iter().map(|k| k as f64 / 64.0).collect()).collect();
                AssignmentInstance::new(w, caps, g.into_iter().map(|k| format!("g{k}")).collect()).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dataset_round_trips(s in dataset()) {
        let mut buf = Vec::new();
        write_dataset(&s, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), s.len());
        for (r, b) in s.rows().iter().zip(back.rows()) {
            prop_assert_eq!(r.period, b.period);
            prop_assert_eq!(&s.alphabet().x_labels()[r.x], &back.alphabet().x_labels()[b.x]);
            prop_assert_eq!(r.y1.map(|i| s.alphabet().y1_value(i)), b.y1.map(|i| back.alphabet().y1_value(i)));
            prop_assert_eq!(r.y2.map(|i| s.alphabet().y2_value(i)), b.y2.map(|i| back.alphabet().y2_value(i)));
        }
    }

    #[test]
    fn solver_matches_brute_force(inst in instance()) {
        match (solve_assignment(&inst), brute_force_assignment(&inst)) {
            (Ok(a), Ok(b)) => {
                prop_assert!(inst.is_feasible(&a.location_of));
                prop_assert_eq!(a.objective, b.objective);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "solver {:?} vs brute force {:?}", a, b),
        }
    }

    #[test]
    fn more_capacity_never_hurts(inst in instance(), j in 0usize..4) {
        let Ok(before) = solve_assignment(&inst) else { return Ok(()) };
        let mut bigger = inst.clone();
        let j = j % bigger.capacities.len();
        bigger.capacities[j] += 1;
        let after = solve_assignment(&bigger).unwrap();
        prop_assert!(after.objective >= before.objective);
    }

    #[test]
    fn unit_constant_shifts_objective(inst in instance(), unit in 0usize..6, k in -64i32..=64) {
        let Ok(before) = solve_assignment(&inst) else { return Ok(()) };
        let mut shifted = inst.clone();
        let unit = unit % shifted.weights.len();
        let c = k as f64 / 64.0;
        shifted.weights[unit].iter_mut().for_each(|w| *w += c);
        let after = solve_assignment(&shifted).unwrap();
        prop_assert_eq!(after.objective, before.objective + c);
    }

    #[test]
    fn truth_beats_any_corruption(inst in instance(), noise in prop::collection::vec(-64i32..=64, 24)) {
        let Ok(best) = solve_assignment(&inst) else { return Ok(()) };
        let mut corrupted = inst.clone();
        let l = corrupted.capacities.len();
        for (i, row) in corrupted.weights.iter_mut().enumerate() {
            for (j, w) in row.iter_mut().enumerate() {
                *w += noise[(i * l + j) % noise.len()] as f64 / 32.0;
            }
        }
        let chosen = solve_assignment(&corrupted).unwrap();
        let impact = evaluate_impact(&chosen, &inst.weights).unwrap();
        prop_assert!(impact <= best.objective);
        prop_assert_eq!(evaluate_impact(&best, &inst.weights).unwrap(), best.objective);
    }
}
