use ionqrm_core::analysis::{lamb_dicke_remainder, verify_t_transformation, AnalysisThresholds};
use ionqrm_core::model::{classify_regime, epsilons, h_jc, h_qrm, HamiltonianKind};
use ionqrm_core::operators::{
    dagger, displacement_generator, displacement_laguerre, interior_block, is_unitary,
};
use ionqrm_core::propagator::{propagate, uniform_times};
use ionqrm_core::{
    IonParams, QuantumState, RegimeLabel, RegimeThresholds, Spin, TruncationSpec, C64,
};
use proptest::prelude::*;

fn trunc(n: usize, g: usize) -> TruncationSpec {
    TruncationSpec::new(n, g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn t_identity_holds_for_random_params(nu in 0.2f64..3.0, omega in 0.0f64..3.0, eta in 0.0f64..0.5) {
        let p = IonParams::new(nu, omega, eta).unwrap();
        let report = verify_t_transformation(&p, trunc(64, 24), &AnalysisThresholds::default()).unwrap();
        prop_assert!(report.pass, "{:?}", report.metrics);
        prop_assert!(report.get("offset_deviation").unwrap() < 1e-8);
    }

    #[test]
    fn displacement_routes_agree(re in -0.8f64..0.8, im in -0.8f64..0.8) {
        let t = trunc(40, 16);
        let alpha = C64::new(re, im);
        let gen = displacement_generator(alpha, t);
        prop_assert!(is_unitary(&gen, 1e-10));
        let diff = interior_block(&(gen - displacement_laguerre(alpha, t)), t);
        prop_assert!(diff.unwrap().norm() < 1e-8);
    }

    #[test]
    fn displacement_inverse_is_negated_argument(re in -0.8f64..0.8, im in -0.8f64..0.8) {
        let t = trunc(32, 8);
        let alpha = C64::new(re, im);
        let d = displacement_generator(alpha, t);
        let d_neg = displacement_generator(-alpha, t);
        prop_assert!((dagger(&d) - d_neg).norm() < 1e-10);
    }

    #[test]
    fn evolution_conserves_norm_and_energy(nu in 0.5f64..2.0, omega in 0.0f64..1.5, eta in 0.0f64..0.4, n in 0usize..5) {
        let p = IonParams::new(nu, omega, eta).unwrap();
        let t = trunc(24, 8);
        let h = h_qrm(&p, t, true).unwrap();
        let psi = QuantumState::fock(Spin::Ground, n, t).unwrap();
        let result = propagate(&h, &psi, &uniform_times(50.0, 25)).unwrap();
        prop_assert!(result.max_norm_residual() < 1e-10);
        prop_assert!(result.max_energy_drift() < 1e-9 * (1.0 + nu * 24.0));
    }

    #[test]
    fn dispersive_shift_is_g_times_eps_sum(nu in 0.2f64..3.0, omega in 0.0f64..3.0, eta in 0.0f64..0.5) {
        let p = IonParams::new(nu, omega, eta).unwrap();
        prop_assume!((2.0 * omega - nu).abs() > 1e-3);
        let c = epsilons(&p).unwrap();
        let expected = c.g_qrm * (c.eps1 + c.eps2);
        prop_assert!((c.chi - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
    }

    #[test]
    fn classifier_is_total_and_deterministic(nu in 0.01f64..10.0, omega in 0.0f64..10.0, eta in 0.0f64..10.0, phi in 0.0f64..std::f64::consts::TAU) {
        let p = IonParams::new(nu, omega, eta).unwrap().with_phase(phi);
        let th = RegimeThresholds::default();
        let a = classify_regime(&p, &th);
        prop_assert_eq!(a, classify_regime(&p, &th));
        // the label depends on nu only through ratios
        let scaled = IonParams::new(2.0 * nu, 2.0 * omega, eta).unwrap().with_phase(phi);
        prop_assert_eq!(a, classify_regime(&scaled, &th));
    }
}

#[test]
fn jc_builder_matches_kind_dispatch() {
    let p = IonParams::new(1.0, 0.5, 0.05).unwrap();
    let t = trunc(16, 4);
    assert_eq!(
        h_jc(&p, t).unwrap(),
        HamiltonianKind::Jc.build(&p, t).unwrap()
    );
}

#[test]
fn lamb_dicke_remainder_shrinks_quadratically() {
    let t = trunc(32, 24);
    let base = IonParams::new(1.0, 0.7, 0.0).unwrap();
    let r1 = lamb_dicke_remainder(&base.with_eta(0.02), t).unwrap();
    let r2 = lamb_dicke_remainder(&base.with_eta(0.01), t).unwrap();
    let order = (r1 / r2).log2();
    assert!(order > 1.8, "order {order}");
}

#[test]
fn deep_strong_label() {
    let p = IonParams::new(1.0, 0.5, 4.0).unwrap();
    assert_eq!(
        classify_regime(&p, &RegimeThresholds::default()),
        RegimeLabel::DeepStrong
    );
}
