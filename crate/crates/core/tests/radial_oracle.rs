mod common;

use common::{bessel_j, disk_robin_laplacian, rel_err};
use robin_core::radial::{shoot_radial_eigen, RadialOptions};

#[test]
fn bessel_series_sanity() {
    // tabulated values
    assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    assert!((bessel_j(1, 2.5) - 0.497_094_102_464_274_1).abs() < 1e-15);
    assert!(bessel_j(0, 2.404_825_557_695_773).abs() < 1e-15);
}

#[test]
fn p2_matches_bessel_roots() {
    let oracle = disk_robin_laplacian(1.0);
    assert!((oracle - 1.577).abs() < 1e-3, "{oracle}");
    for beta in [0.5, 1.0, 5.0] {
        let prof = shoot_radial_eigen(2, 1.0, 2.0, beta, 1e-9, &RadialOptions::default()).unwrap();
        let exact = disk_robin_laplacian(beta);
        assert!(rel_err(prof.lambda, exact) < 1e-6);
    }
}
