use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use qnm_core::barrier::{barrier_data, AngularMode, PseudopoleCoeffs, SecondOrderClosure};
use qnm_core::solver::{lattice_search, ModeOperator, OperatorKind, Rect, SearchSettings};
use qnm_core::spacetime::{BlackHoleParams, PotentialProfile};

#[test]
fn finds_first_two_strings_for_each_kind() {
    let profile = Arc::new(PotentialProfile::new(BlackHoleParams::new(1.0, 0.5, 0.05).unwrap()).unwrap());
    let data = barrier_data(&profile).unwrap();
    let coeffs = PseudopoleCoeffs::new(&data, SecondOrderClosure::BarrierTop);
    let mode = AngularMode::from_n(10).unwrap();
    let nz = 10.0 * data.z0;
    let gamma = data.damping_unit();
    let window = Rect::new(0.6 * nz, 1.4 * nz, -2.0 * gamma, 0.0).unwrap();
    for kind in OperatorKind::ALL {
        let t = Instant::now();
        let op = ModeOperator::new(kind, mode, profile.clone());
        let report = lattice_search(&op, &coeffs, window, &SearchSettings::default()).unwrap();
        eprintln!(
            "{kind}: {:?} counted {} in {:?}",
            report.list.lambdas(),
            report.counted,
            t.elapsed()
        );
        assert!(report.complete);
        assert_eq!(report.counted, 2);
        let first = report.list.least_damped().unwrap().lambda;
        assert!((first - Complex64::new(1.5439719304391688, -0.0747541496938865)).norm() < 1e-8);
    }
}
