use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use qnm_core::barrier::{barrier_data, lattice, pseudopole, AngularMode, PseudopoleCoeffs, SecondOrderClosure};
use qnm_core::evolution::{Grid1D, Snapshot, SpinorField, Stepper};
use qnm_core::solver::match_multisets;
use qnm_core::spacetime::{find_horizons, BlackHoleParams, Laurent, PotentialProfile};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn horizons_are_roots_with_signed_gravities(charge in 0.0..0.9f64, lambda in 0.005..0.08f64) {
        let params = BlackHoleParams::new(1.0, charge, lambda);
        prop_assume!(params.is_ok());
        let h = find_horizons(&params.unwrap());
        prop_assume!(h.is_ok());
        let h = h.unwrap();
        prop_assert!(h.residuals.iter().all(|r| *r < 1e-12));
        prop_assert!(h.kappa_minus() > 0.0 && h.kappa_plus() < 0.0);
    }

    #[test]
    fn tortoise_round_trips(t in 0.001..0.999f64) {
        let p = PotentialProfile::new(BlackHoleParams::new(1.0, 0.5, 0.05).unwrap()).unwrap();
        let map = p.map();
        let h = map.horizons();
        let r = h.r_minus() + t * (h.r_plus() - h.r_minus());
        let x = map.tortoise(r).unwrap();
        prop_assert!((map.radius_from_tortoise(x) - r).abs() < 1e-10 * r);
    }

    #[test]
    fn pseudopoles_scale_inversely_with_mass(
        s in 0.5..2.0f64,
        half in 0u32..40,
        k in 0u32..4,
        order in 0u8..=2,
    ) {
        let base = BlackHoleParams::new(1.0, 0.5, 0.05).unwrap();
        let value = |params: BlackHoleParams| {
            let b = barrier_data(&PotentialProfile::new(params).unwrap()).unwrap();
            pseudopole(&PseudopoleCoeffs::new(&b, SecondOrderClosure::BarrierTop), k, AngularMode::new(2 * half + 1).unwrap(), order).unwrap().value
        };
        let a = value(base);
        let b = value(base.rescaled(s));
        prop_assert!((b * s - a).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn lattice_is_mirror_closed_and_damped(hi in 0u32..12, k_max in 0u32..4, order in 1u8..=2) {
        let b = barrier_data(&PotentialProfile::new(BlackHoleParams::new(1.0, 0.5, 0.05).unwrap()).unwrap()).unwrap();
        let coeffs = PseudopoleCoeffs::new(&b, SecondOrderClosure::BarrierTop);
        let modes: Vec<AngularMode> = (0..=hi).map(|h| AngularMode::new(2 * h + 1).unwrap()).collect();
        let ks: Vec<u32> = (0..=k_max).collect();
        let all = lattice(&coeffs, &modes, &ks, order).unwrap();
        prop_assert_eq!(all.len(), 2 * modes.len() * ks.len());
        for p in &all {
            prop_assert!(p.value.im < 0.0);
            let m = -p.value.conj();
            prop_assert!(all.iter().any(|q| (q.value - m).norm() < 1e-14));
        }
    }

    #[test]
    fn matching_a_perturbed_permutation_is_bijective(
        points in prop::collection::vec(complex(), 1..12),
        shift in 0usize..12,
    ) {
        // Keep points well separated so the nearest neighbour is unambiguous.
        let mut pts: Vec<Complex64> = Vec::new();
        for p in points {
            if pts.iter().all(|q| (q - p).norm() > 1e-3) {
                pts.push(p);
            }
        }
        let mut other: Vec<Complex64> = pts.iter().map(|z| z + Complex64::new(1e-9, -1e-9)).collect();
        let len = other.len();
        other.rotate_left(shift % len);
        let m = match_multisets(&pts, &other, 1e-6);
        prop_assert!(m.bijective());
        prop_assert!(m.max_distance < 2e-9);
    }

    #[test]
    fn laurent_product_rule(
        a in prop::collection::vec(-3.0..3.0f64, 1..5),
        b in prop::collection::vec(-3.0..3.0f64, 1..5),
        pa in -3i32..2,
        pb in -3i32..2,
        r in 0.5..4.0f64,
    ) {
        let f = Laurent::new(pa, a);
        let g = Laurent::new(pb, b);
        let lhs = f.mul(&g).derivative().eval(r);
        let rhs = f.derivative().mul(&g).eval(r) + f.mul(&g.derivative()).eval(r);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn snapshot_round_trip(values in prop::collection::vec(complex(), 1..40), t in 0.0..100.0f64, dx in 0.001..1.0f64) {
        let n = values.len();
        let field = SpinorField { u: values.clone(), v: values.iter().rev().copied().collect() };
        let snap = Snapshot { t, dx, field };
        let back = Snapshot::from_bytes(&snap.to_bytes()).unwrap();
        prop_assert_eq!(back.field.len(), n);
        prop_assert_eq!(back, snap);
    }

    #[test]
    fn strang_steps_conserve_the_discrete_norm(
        coupling in prop::collection::vec(-3.0..3.0f64, 8),
        data in prop::collection::vec(complex(), 16),
        steps in 1usize..40,
    ) {
        let grid = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let dx = grid.dx();
        // Smooth coupling through the random values; zero near the ends.
        let q: Vec<f64> = grid.nodes().iter().map(|&x| {
            let s = ((x + 4.0) / 8.0 * 7.0).clamp(0.0, 7.0);
            let i = (s.floor() as usize).min(6);
            let w = s - i as f64;
            let bump = if x.abs() < 5.0 { (std::f64::consts::FRAC_PI_2 * x / 5.0).cos().powi(2) } else { 0.0 };
            bump * ((1.0 - w) * coupling[i] + w * coupling[i + 1])
        }).collect();
        let mut field = SpinorField::zeros(grid.points);
        for (j, z) in data.iter().enumerate() {
            field.u[90 + j / 2] += *z;
            field.v[90 + j / 2] += z.conj();
        }
        let before = field.norm(dx);
        let stepper = Stepper::new(&grid, &q, dx).unwrap();
        for _ in 0..steps {
            stepper.step(&mut field);
        }
        prop_assert!((field.norm(dx) - before).abs() <= 1e-12 * before.max(1e-300));
    }
}

#[test]
fn profile_is_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<Arc<PotentialProfile>>();
}
