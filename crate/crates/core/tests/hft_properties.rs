use hft_spectra::hft::{
    hft_check, hft_ladder, scaled_eigenvalue, scaled_grid_for, scaling_consistency,
};
use hft_spectra::solver::GridSpec;
use hft_spectra::PotentialSpec;

fn physical() -> GridSpec {
    GridSpec::new(200.0, 4000).unwrap()
}

fn specs(beta: f64) -> [PotentialSpec; 2] {
    [
        PotentialSpec::screened(beta).unwrap(),
        PotentialSpec::truncated(beta, 2.0).unwrap(),
    ]
}

#[test]
fn expectation_side_is_negative() {
    for beta in [0.05, 0.3, 1.0, 1.7, 3.0] {
        let grid = scaled_grid_for(&physical(), beta).unwrap();
        for spec in specs(beta) {
            for k in 1..=3 {
                let r = hft_check(&spec, k, 0, &grid, beta / 20.0).unwrap();
                assert!(r.rhs_expect < 0.0, "{r:?}");
                assert!(r.lhs_fd < 0.0, "{r:?}");
            }
        }
    }
}

#[test]
fn ground_level_is_concave_in_beta() {
    // beta^2 H(beta) is affine in beta, so its lowest eigenvalue is concave.
    let grid = GridSpec::new(150.0, 3000).unwrap();
    let h = 0.05;
    for spec in specs(1.0) {
        let e = |b: f64| scaled_eigenvalue(&spec.with_beta(b).unwrap(), 1, 0, &grid).unwrap();
        for i in 1..30 {
            let b = i as f64 * h;
            let second = e(b + h) - 2.0 * e(b) + e(b - h);
            assert!(second <= 1e-8, "{spec:?} beta={b}: {second:e}");
        }
    }
}

#[test]
fn residual_shrinks_quadratically_with_step() {
    for (beta, l) in [(0.5, 0), (0.8, 1), (2.0, 0)] {
        let grid = scaled_grid_for(&physical(), beta).unwrap();
        for spec in specs(beta) {
            let ladder = hft_ladder(&spec, 1, l, &grid, 2e-3, 3).unwrap();
            assert!(ladder.min_order() >= 1.7, "{spec:?} l={l}: {ladder:?}");
        }
    }
}

#[test]
fn rotational_levels_satisfy_the_identity() {
    let beta = 0.6;
    let grid = scaled_grid_for(&physical(), beta).unwrap();
    for spec in specs(beta) {
        for k in 1..=2 {
            let r = hft_check(&spec, k, 2, &grid, 1e-3).unwrap();
            assert!(r.passes(), "{r:?}");
        }
    }
}

#[test]
fn scaling_routes_agree_off_dyadic_beta() {
    for beta in [0.3, 0.7, 1.3] {
        let grid = scaled_grid_for(&physical(), beta).unwrap();
        for spec in specs(beta) {
            let m = scaling_consistency(&spec, 1, 0, &grid).unwrap();
            assert!(m <= 1e-10, "{spec:?}: {m:e}");
        }
    }
}
