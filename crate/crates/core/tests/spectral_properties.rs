use std::f64::consts::PI;

use proptest::prelude::*;
use quasineutral::spectral::{
    curl, dealias, divergence, gradient, helmholtz, hs_norm, laplacian, leray_projection,
    poisson_solve, velocity_from_divcurl, PeriodicGrid, ScalarField, VectorField,
};

const BAND: i64 = 5;
const MODES: usize = 60; // (k1, k2) with k1 > 0, or k1 == 0 and k2 > 0, inside the band

fn modes() -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for k1 in 0..=BAND {
        for k2 in -BAND..=BAND {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            out.push((k1, k2));
        }
    }
    out
}

fn field(grid: &PeriodicGrid, mean: f64, coeffs: &[(f64, f64)]) -> ScalarField {
    let modes = modes();
    ScalarField::from_fn(grid, |x, y| {
        mean + modes
            .iter()
            .zip(coeffs)
            .map(|(&(k1, k2), &(a, b))| {
                let p = 2.0 * PI * (k1 as f64 * x + k2 as f64 * y);
                a * p.cos() + b * p.sin()
            })
            .sum::<f64>()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 55..=MODES)
}

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(32).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(mean in -2.0..2.0f64, c in coeffs()) {
        let f = field(&grid(), mean, &c);
        let nodes = f.values().iter().map(|v| v * v).sum::<f64>() / f.values().len() as f64;
        prop_assert!(close(hs_norm(&f, 0.0).powi(2), nodes, 1e-10));
    }

    #[test]
    fn helmholtz_parts_are_orthogonal(cx in coeffs(), cy in coeffs()) {
        let g = grid();
        let v = VectorField::new(field(&g, 0.3, &cx), field(&g, -0.1, &cy));
        let parts = helmholtz(&v);
        let ip = parts.solenoidal.inner(&parts.potential);
        prop_assert!(ip.abs() <= 1e-10 * parts.solenoidal.l2_norm() * parts.potential.l2_norm() + 1e-14);
        prop_assert!(divergence(&parts.solenoidal).max_abs() < 1e-10);
        prop_assert!(curl(&parts.potential).max_abs() < 1e-10);
        let sum = parts.solenoidal.add_constant(parts.mean).axpy(1.0, &parts.potential);
        prop_assert!((&sum - &v).l2_norm() < 1e-12 * v.l2_norm());
    }

    #[test]
    fn leray_projection_is_idempotent(cx in coeffs(), cy in coeffs()) {
        let g = grid();
        let v = VectorField::new(field(&g, 0.5, &cx), field(&g, 0.0, &cy));
        let p = leray_projection(&v);
        let pp = leray_projection(&p);
        prop_assert!((&pp - &p).l2_norm() <= 1e-13 * p.l2_norm());
    }

    #[test]
    fn derivatives_of_projected_fields_stay_solenoidal(cx in coeffs(), cy in coeffs()) {
        let g = grid();
        let p = leray_projection(&VectorField::new(field(&g, 0.0, &cx), field(&g, 0.0, &cy)));
        let dx = gradient(&p.x);
        let dy = gradient(&p.y);
        // ∂₁(Πv) and ∂₂(Πv)
        for d in [VectorField::new(dx.x, dy.x), VectorField::new(dx.y, dy.y)] {
            prop_assert!(divergence(&d).max_abs() < 1e-10 * (1.0 + d.l2_norm()));
        }
    }

    #[test]
    fn div_curl_round_trip(cb in coeffs(), cw in coeffs(), m in prop::array::uniform2(-1.0..1.0f64)) {
        let g = grid();
        let beta = field(&g, 0.0, &cb);
        let omega = field(&g, 0.0, &cw);
        let v = velocity_from_divcurl(&beta, &omega, m).unwrap();
        prop_assert!((&divergence(&v) - &beta).max_abs() < 1e-10 * (1.0 + beta.max_abs()));
        prop_assert!((&curl(&v) - &omega).max_abs() < 1e-10 * (1.0 + omega.max_abs()));
        let mean = v.mean();
        prop_assert!((mean[0] - m[0]).abs() < 1e-14 && (mean[1] - m[1]).abs() < 1e-14);
    }

    #[test]
    fn poisson_inverse_and_linearity(cf in coeffs(), cg in coeffs(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let gr = grid();
        let f = field(&gr, 0.0, &cf);
        let g = field(&gr, 0.0, &cg);
        let uf = poisson_solve(&f).unwrap();
        prop_assert!((&laplacian(&uf) - &f).max_abs() < 1e-12 * (1.0 + f.max_abs()));
        prop_assert!(uf.mean().abs() < 1e-14);
        let ug = poisson_solve(&g).unwrap();
        let combo = poisson_solve(&f.scale(a).axpy(b, &g)).unwrap();
        let lin = uf.scale(a).axpy(b, &ug);
        prop_assert!((&combo - &lin).max_abs() < 1e-12 * (1.0 + lin.max_abs()));
    }

    #[test]
    fn dealias_keeps_the_band_and_is_idempotent(c in coeffs()) {
        let f = field(&grid(), 1.0, &c);
        // band 5 is below the cutoff 32/3
        prop_assert!((&dealias(&f) - &f).max_abs() < 1e-12);
        let h = f.pointwise(&f);
        let d = dealias(&h);
        prop_assert!((&dealias(&d) - &d).max_abs() < 1e-13 * (1.0 + d.max_abs()));
    }
}

#[test]
fn poisson_rejects_nonzero_mean() {
    let g = grid();
    assert!(poisson_solve(&ScalarField::constant(&g, 1.0)).is_err());
}
