use nalgebra::DMatrix;
use proptest::prelude::*;

use holocat::catcode::{dfs_projector, CatBasis};
use holocat::fockspace::{coherent_state, ladder_operators, SpaceConfig, StateVector, C64};
use holocat::harness::fit::power_law_fit;
use holocat::harness::metrics::{impurity, wrap_phase};
use holocat::holonomy::decomposed_lme_tensor;
use holocat::liouvillian::{build_jump, liouvillian_matrix, DensityOperator, JumpSpec};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn coherent_state_is_normalized_eigenvector(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let cfg = SpaceConfig::with_dim(40).unwrap();
        let alpha = C64::new(re, im);
        let psi = coherent_state(alpha, &cfg).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
        let a = ladder_operators(&cfg).a;
        prop_assert!((a.expectation(&psi) - alpha).norm() < 1e-8);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        d in 1usize..4,
        r in 0.2f64..1.5,
        phase in 0.0f64..6.28,
    ) {
        let cfg = SpaceConfig::with_dim(16).unwrap();
        let roots: Vec<C64> = (0..d)
            .map(|k| C64::from_polar(r, phase + 2.0 * std::f64::consts::PI * k as f64 / d as f64))
            .collect();
        let l = liouvillian_matrix(&build_jump(&JumpSpec::new(1.0, roots).unwrap(), &cfg).unwrap());
        prop_assert!(l.trace_preservation_residual() < 1e-9);
        let rho = DensityOperator::pure(&StateVector::fock(1, &cfg).unwrap());
        let out = l.apply(rho.matrix());
        prop_assert!(out.trace().norm() < 1e-9);
        prop_assert!((&out - out.adjoint()).norm() < 1e-9);
    }

    #[test]
    fn cat_basis_is_orthonormal(d in 1usize..5, r in 0.1f64..2.5) {
        let cfg = SpaceConfig::sufficient(r, 1e-8).unwrap();
        let basis = CatBasis::symmetric(d, C64::from(r), &cfg).unwrap();
        prop_assert!(basis.orthonormality_residual() < 1e-10);
        let p = dfs_projector(&basis);
        let pm = p.matrix();
        prop_assert!((pm * pm - pm).norm() < 1e-10);
        prop_assert!((pm.trace().re - d as f64).abs() < 1e-10);
    }

    #[test]
    fn impurity_is_bounded(w in proptest::collection::vec(0.0f64..1.0, 2..6)) {
        let cfg = SpaceConfig::with_dim(8).unwrap();
        let total: f64 = w.iter().sum::<f64>() + 1e-3;
        let states: Vec<StateVector> = (0..w.len()).map(|k| StateVector::fock(k, &cfg).unwrap()).collect();
        let parts: Vec<(f64, &StateVector)> = w.iter().map(|x| (x + 1e-3 / w.len() as f64) / total).zip(&states).collect();
        let rho = DensityOperator::mixture(&parts).unwrap();
        let e = impurity(&rho);
        prop_assert!(e >= 0.0 && e <= 1.0 - 1.0 / w.len() as f64 + 1e-12);
    }
}

proptest! {
    #[test]
    fn wrapped_phase_lies_in_half_open_interval(x in -100.0f64..100.0) {
        let w = wrap_phase(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        prop_assert!(((x - w) / (2.0 * std::f64::consts::PI)).fract().abs().min(1.0 - ((x - w) / (2.0 * std::f64::consts::PI)).fract().abs()) < 1e-9);
    }

    #[test]
    fn exact_power_laws_are_recovered(slope in -4.0f64..4.0, scale in 0.01f64..100.0) {
        let xs = [1.0, 2.0, 5.0, 10.0, 20.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| scale * x.powf(slope)).collect();
        let f = power_law_fit(&xs, &ys).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!(!f.low_confidence);
    }

    #[test]
    fn single_state_lme_tensor_is_zero(a in -10.0f64..10.0) {
        let t = decomposed_lme_tensor(&DMatrix::from_element(1, 1, C64::from(a)));
        prop_assert!(t[0].norm() < 1e-12);
    }
}
