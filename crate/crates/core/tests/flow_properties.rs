use proptest::prelude::*;
use quasineutral::flow::{
    momentum, oscillation_filter, perturbation_from_primitive, rotation_phase, BaseFlow, Coupling,
    FlowState, PerturbationState, Scaling,
};
use quasineutral::spectral::{PeriodicGrid, ScalarField, VectorField};

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(8).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 64)
}

fn state(b: Vec<f64>, r: Vec<f64>, eps: f64) -> PerturbationState {
    let g = grid();
    PerturbationState {
        omega1: ScalarField::zeros(&g),
        beta1: ScalarField::new(&g, b),
        rho1: ScalarField::new(&g, r),
        eps,
        scaling: Scaling::NonPrepared,
    }
}

proptest! {
    #[test]
    fn rotation_preserves_the_pair_norm(b in values(), r in values(), eps in 0.01..1.0f64, dt in -5.0..5.0f64) {
        let u = state(b, r, eps);
        let n0 = u.rotating_norm();
        let n1 = rotation_phase(&u, dt).rotating_norm();
        prop_assert!((n0 - n1).abs() <= 1e-13 * n0.max(1.0));
    }

    #[test]
    fn filter_undoes_the_rotation(b in values(), r in values(), eps in 0.01..1.0f64, t in 0.0..2.0f64) {
        let u = state(b, r, eps);
        let (fb, fr) = oscillation_filter(&rotation_phase(&u, t), t);
        prop_assert!((&fb - &u.beta1).max_abs() < 1e-11);
        prop_assert!((&fr - &u.rho1).max_abs() < 1e-11);
    }
}

#[test]
fn primitive_round_trip_keeps_momentum() {
    let g = PeriodicGrid::new(16).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    let base = BaseFlow::from_velocity(VectorField::from_fn(&g, |x, y| {
        [
            -(tau * x).sin() * (tau * y).cos(),
            (tau * x).cos() * (tau * y).sin(),
        ]
    }));
    let eps = 0.1;
    let v = VectorField::from_fn(&g, |x, y| {
        let [a, b] = [
            -(tau * x).sin() * (tau * y).cos(),
            (tau * x).cos() * (tau * y).sin(),
        ];
        [
            a + eps * (tau * y).cos() + 0.01,
            b + eps * 0.5 * (tau * x).sin(),
        ]
    });
    let rho = ScalarField::from_fn(&g, |x, y| 1.0 + eps * eps * (tau * (x - y)).cos());
    let s = FlowState::new(rho, v, eps, Coupling::Poisson).unwrap();
    let p = perturbation_from_primitive(&s, &base);
    let (rho2, v2) = p.to_primitive(Some(&base), momentum(&s)).unwrap();
    assert!((&rho2 - &s.rho).max_abs() < 1e-12);
    assert!((&v2 - &s.v).l2_norm() < 1e-12);
}
