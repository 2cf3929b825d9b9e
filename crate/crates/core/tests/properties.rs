mod common;

use proptest::prelude::*;

use typedcrf::factor_graph::{project_factor, project_simplex, FactorKind};

fn kind_strategy() -> impl Strategy<Value = FactorKind> {
    prop::sample::select(FactorKind::ALL.to_vec())
}

fn projection_case() -> impl Strategy<Value = (FactorKind, Vec<bool>, Vec<f64>)> {
    kind_strategy().prop_flat_map(|kind| {
        let n = if kind == FactorKind::Imply { 2..=2 } else { 1..=6usize };
        n.prop_flat_map(move |n| {
            (
                Just(kind),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(-3.0f64..=3.0, n),
            )
        })
    })
}

proptest! {
    #[test]
    fn projection_is_idempotent((kind, negs, v) in projection_case()) {
        let p = project_factor(kind, &negs, &v).unwrap();
        let q = project_factor(kind, &negs, &p).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn projection_is_feasible((kind, negs, v) in projection_case()) {
        let p = project_factor(kind, &negs, &v).unwrap();
        prop_assert!(common::in_polytope(kind, &negs, &p, 1e-9));
    }

    #[test]
    fn projection_beats_every_vertex_direction((kind, negs, v) in projection_case()) {
        let p = project_factor(kind, &negs, &v).unwrap();
        for x in common::polytope_vertices(kind, &negs) {
            let inner: f64 = v.iter().zip(&p).zip(&x).map(|((vi, pi), xi)| (vi - pi) * (xi - pi)).sum();
            prop_assert!(inner <= 1e-9, "{:?} -> {:?} beaten towards {:?}", v, p, x);
        }
    }

    #[test]
    fn simplex_projection_sums_to_target(
        v in prop::collection::vec(-5.0f64..=5.0, 1..80),
        frac in 0.05f64..=1.0,
    ) {
        let target = frac * v.len() as f64;
        let p = project_simplex(&v, target).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - target).abs() <= 1e-9 * (1.0 + target));
    }
}

#[test]
fn projection_grid_oracle() {
    common::check_projection_oracle(400, 11).unwrap();
}

#[test]
fn admm_agrees_with_exhaustive_map() {
    let stats = common::check_admm_vs_exhaustive(200, 7).unwrap();
    assert_eq!(stats.feasible + stats.infeasible, 200);
    assert!(stats.integral > stats.feasible / 2, "{stats:?}");
}

#[test]
fn joint_feature_identity() {
    common::check_joint_feature_identity(100, 3).unwrap();
}

#[test]
fn unroll_energy_equivalence() {
    common::check_unroll_energy(60, 5).unwrap();
}

#[test]
fn flatten_round_trip() {
    common::check_flatten_round_trip(100, 13).unwrap();
}

#[test]
fn constrained_predictions_satisfy_constraints() {
    let predicted = common::check_constraint_satisfaction(80, 17).unwrap();
    assert!(predicted > 0);
}

#[test]
fn generator_and_checker_agree() {
    let stats = common::check_generator_consistency(1000, 1).unwrap();
    assert!((stats.background_fraction - 0.733).abs() <= 0.05, "{stats:?}");
    assert!((stats.discard_rate - 0.12).abs() <= 0.10, "{stats:?}");
}
