mod common;

use cooploc::instances::rng_for;
use cooploc::MeasurementKind;

const TOL: f64 = 1e-5;

#[test]
fn motion_jacobians_match_finite_differences() {
    let e = common::motion_jacobian_error(100, &mut rng_for(1));
    assert!(e < TOL, "{e}");
}

#[test]
fn relative_jacobians_match_finite_differences() {
    let mut rng = rng_for(2);
    for kind in MeasurementKind::ALL {
        let e = common::relative_jacobian_error(kind, 100, &mut rng);
        assert!(e < TOL, "{}: {e}", kind.name());
    }
}

#[test]
fn landmark_range_jacobian_matches_finite_differences() {
    let e = common::range_jacobian_error(100, &mut rng_for(3));
    assert!(e < TOL, "{e}");
}
