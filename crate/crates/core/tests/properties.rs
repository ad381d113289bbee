use hft_spectra::potential::{
    f_value, potential_value, reduce_units, scaled_potential_value, DimensionfulInputs,
};
use hft_spectra::solver::{count_nodes, lowest_eigenpairs, GridSpec, RadialProblem};
use hft_spectra::tridiag::SymTridiagonal;
use hft_spectra::{Family, PotentialSpec};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = (Family, f64)> {
    prop_oneof![
        Just((Family::Screened, 1.0)),
        (0.5f64..6.0).prop_map(|p| (Family::Truncated, p)),
    ]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn f_is_bounded_and_nonincreasing((fam, p) in family(), z in 0.0f64..50.0, dz in 0.0f64..5.0) {
        let spec = PotentialSpec::new(fam, 1.0, p).unwrap();
        let a = f_value(&spec, z).unwrap();
        let b = f_value(&spec, z + dz).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn potential_lies_above_coulomb((fam, p) in family(), beta in 0.0f64..5.0, r in 1e-3f64..100.0) {
        let spec = PotentialSpec::new(fam, beta, p).unwrap();
        let v = potential_value(&spec, r).unwrap();
        prop_assert!(v <= 0.0);
        prop_assert!(v >= -1.0 / r * (1.0 + 1e-15));
    }

    #[test]
    fn scaling_identity((fam, p) in family(), beta in 0.01f64..5.0, r in 1e-2f64..50.0) {
        let spec = PotentialSpec::new(fam, beta, p).unwrap();
        let lhs = beta * beta * potential_value(&spec, beta * r).unwrap();
        let rhs = scaled_potential_value(&spec, r).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn scaled_potential_is_linear_in_beta((fam, p) in family(), beta in 0.0f64..5.0, r in 1e-2f64..50.0) {
        let unit = scaled_potential_value(&PotentialSpec::new(fam, 1.0, p).unwrap(), r).unwrap();
        let v = scaled_potential_value(&PotentialSpec::new(fam, beta, p).unwrap(), r).unwrap();
        prop_assert!(close(v, beta * unit, 1e-14));
    }

    #[test]
    fn units_ignore_the_mass_unit(hbar in 0.1f64..10.0, m in 0.1f64..10.0, k in 0.1f64..10.0, b in 0.1f64..10.0, s in 0.1f64..10.0) {
        // Changing the mass unit rescales hbar, m and k by the same factor s.
        let a = reduce_units(&DimensionfulInputs { hbar, mass: m, strength: k, length_param: b }).unwrap();
        let scaled = DimensionfulInputs { hbar: hbar * s, mass: m * s, strength: k * s, length_param: b };
        let c = reduce_units(&scaled).unwrap();
        prop_assert!(close(a.beta, c.beta, 1e-12));
        prop_assert!(close(a.length_unit, c.length_unit, 1e-12));
        prop_assert!(close(a.energy_unit * s, c.energy_unit, 1e-12));
    }

    #[test]
    fn sturm_counts_bracket_eigenvalues(
        diag in proptest::collection::vec(-5.0f64..5.0, 2..40),
        seed in proptest::collection::vec(-2.0f64..2.0, 40),
    ) {
        let n = diag.len();
        let off = seed[..n - 1].to_vec();
        let m = SymTridiagonal::new(diag, off).unwrap();
        let values = m.lowest_eigenvalues(n).unwrap();
        let scale = m.norm().max(1.0);
        for w in values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (i, e) in values.iter().enumerate() {
            prop_assert!(m.sturm_count(e - 1e-9 * scale) <= i);
            prop_assert!(m.sturm_count(e + 1e-9 * scale) > i);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenfunctions_are_normalized_with_k_minus_one_nodes((fam, p) in family(), beta in 0.0f64..2.0, l in 0u32..3) {
        let spec = PotentialSpec::new(fam, beta, p).unwrap();
        let grid = GridSpec::new(80.0, 1600).unwrap();
        let result = lowest_eigenpairs(&RadialProblem::new(spec, l, grid), 3).unwrap();
        for k in 0..3 {
            prop_assert!((result.norm(k) - 1.0).abs() < 1e-10);
            prop_assert_eq!(count_nodes(&result.eigenfunctions[k]), k);
        }
        prop_assert!(result.energies[0] < result.energies[1] && result.energies[1] < result.energies[2]);
    }
}
