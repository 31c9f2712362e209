use proptest::prelude::*;
use rydqc_core::measurement_model::*;
use std::f64::consts::PI;

/// Golden-section minimum of the two-term model on a log scale.
fn numeric_argmin(v: f64, tau: f64) -> f64 {
    let f = |x: f64| blockade_error_model(x.exp(), v, tau);
    let (mut a, mut b) = ((1.0f64).ln(), (1e12f64).ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    ((a + b) / 2.0).exp()
}

#[test]
fn default_budget_values() {
    let b = blockade_gate_budget(&MeasurementParams::default()).unwrap();
    assert!(
        (b.omega_opt / (2.0 * PI) / 1e6 - 1.0).abs() < 0.01,
        "{}",
        b.omega_opt
    );
    assert!((b.p_g - 1.25e-3).abs() < 0.01e-3, "{}", b.p_g);
    assert!((b.p_sc - 6.25e-6).abs() < 0.05e-6, "{}", b.p_sc);
    assert!((b.p_phi - 1.028e-7).abs() < 0.005e-7, "{}", b.p_phi);
    let n = array_budget(b.p_g, 10e-3, 3.33).unwrap();
    assert!((n - 235.0).abs() < 2.0, "{n}");
}

#[test]
fn model_minimum_is_p_g() {
    let p = MeasurementParams::default();
    let b = blockade_gate_budget(&p).unwrap();
    let eps = blockade_error_model(b.omega_opt, p.v_blockade, p.tau_a);
    assert!((eps / b.p_g - 1.0).abs() < 1e-12);
}

#[test]
fn majority_vote_small_cases() {
    let p: f64 = 0.1;
    assert!((majority_vote_error(p, 1).unwrap() - p).abs() < 1e-15);
    assert!((majority_vote_error(p, 3).unwrap() - (3.0 * p * p - 2.0 * p.powi(3))).abs() < 1e-14);
    assert!(majority_vote_error(p, 0).is_err());
}

#[test]
fn invalid_params_rejected() {
    let p = MeasurementParams {
        p_eps_target: 1.5,
        ..Default::default()
    };
    assert!(blockade_gate_budget(&p).is_err());
    let p = MeasurementParams {
        tau_a: 0.0,
        ..Default::default()
    };
    assert!(blockade_gate_budget(&p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_rabi_is_the_model_argmin(v_mhz in 1.0f64..100.0, tau_us in 20.0f64..2000.0) {
        let p = MeasurementParams { v_blockade: 2.0 * PI * v_mhz * 1e6, tau_a: tau_us * 1e-6, ..Default::default() };
        let b = blockade_gate_budget(&p).unwrap();
        let num = numeric_argmin(p.v_blockade, p.tau_a);
        prop_assert!((num / b.omega_opt - 1.0).abs() < 0.01);
    }

    #[test]
    fn budget_probabilities_in_unit_interval(
        v_mhz in 0.5f64..100.0, tau_us in 20.0f64..2000.0,
        pt in 0.0f64..=1.0, po in 0.0f64..=1.0, pn in 0.0f64..=1.0, shift_khz in 0.0f64..50.0,
    ) {
        let p = MeasurementParams {
            v_blockade: 2.0 * PI * v_mhz * 1e6,
            tau_a: tau_us * 1e-6,
            p_eps_target: pt,
            p_eps_others: po,
            p_eps_nn: pn,
            neighbor_shift: 2.0 * PI * shift_khz * 1e3,
            ..Default::default()
        };
        let b = blockade_gate_budget(&p).unwrap();
        for x in [b.p_g, b.p_sc, b.p_p_blockaded, b.p_p_unblockaded, b.p_p_nn, b.p_phi] {
            prop_assert!(x.is_finite() && (0.0..=1.0).contains(&x), "{}", x);
        }
    }

    #[test]
    fn majority_vote_in_unit_interval(p in 0.0f64..=1.0, k in 1u32..200) {
        let e = majority_vote_error(p, k).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
    }
}
