use proptest::prelude::*;
use rydqc_core::atomic_structure::Polarization;
use rydqc_core::lifetime::*;
use std::f64::consts::PI;

const E: f64 = 1.602_176_634e-19;
const EPS0: f64 = 8.854_187_812_8e-12;
const C: f64 = 299_792_458.0;
const ME: f64 = 9.109_383_701_5e-31;
const HBAR: f64 = 1.054_571_817e-34;
const A0: f64 = 5.291_772_109_03e-11;
const R_INF: f64 = 10_973_731.568_160;
const M_RB: f64 = 86.909_180_531 * 1.660_539_066_60e-27;

/// Spontaneous rate nC → (n−1)C from the closed-form circular matrix element.
fn circular_a(n: u32) -> f64 {
    let nf = n as f64;
    let ln = libm::lgamma;
    let log_r = (2.0 * nf + 1.0) * (2.0 / nf).ln() / 2.0
        + (2.0 * nf - 1.0) * (2.0 / (nf - 1.0)).ln() / 2.0
        - 0.5 * ln(2.0 * nf + 1.0)
        - 0.5 * ln(2.0 * nf - 1.0)
        + ln(2.0 * nf + 1.0)
        - (2.0 * nf + 1.0) * (1.0 / nf + 1.0 / (nf - 1.0)).ln();
    let r = log_r.exp() * A0;
    let ang2 = (nf - 1.0) / (2.0 * nf - 1.0);
    let ry = R_INF / (1.0 + ME / M_RB);
    let w = 2.0 * PI * C * ry * (1.0 / (nf - 1.0).powi(2) - 1.0 / (nf * nf));
    w.powi(3) * E * E * r * r * ang2 / (3.0 * PI * EPS0 * HBAR * C.powi(3))
}

#[test]
fn free_space_rate_matches_closed_form() {
    for n in [50u32, 56, 60, 64, 68] {
        let got = total_decay_rate(n, &LdosModel::FreeSpace, 0.0, n + 6)
            .unwrap()
            .total;
        let want = circular_a(n);
        assert!((got / want - 1.0).abs() < 1e-6, "n={n}: {got} vs {want}");
    }
    // about 29 ms at n = 50
    let tau = 1.0 / circular_a(50);
    assert!((tau - 29e-3).abs() < 1.5e-3, "{tau}");
}

#[test]
fn bandstop_lifetimes_at_zero_and_four_kelvin() {
    let m = LdosModel::default_bandstop();
    for (n, t0) in [(56u32, 505.0), (60, 714.0), (64, 987.0), (68, 1338.0)] {
        let cold = converged_decay_rate(n, &m, 0.0).unwrap().lifetime();
        assert!((cold / t0 - 1.0).abs() < 5e-3, "n={n}: {cold}");
        let warm = converged_decay_rate(n, &m, 4.0).unwrap().lifetime();
        assert!((1.0..10.0).contains(&warm), "n={n}: {warm}");
    }
}

#[test]
fn useful_lifetime_composition() {
    let t = useful_lifetime(0.05, 1e6, 0.0025).unwrap();
    assert!((t - 2.837).abs() < 0.01, "{t}");
}

#[test]
fn tabulated_ldos_interpolates_in_log() {
    let csv = "frequency_hz,P_sigma,P_pi\n1e9,1e-2,1\n3e9,1e-4,1\n";
    let m = LdosModel::from_csv(csv.as_bytes()).unwrap();
    let mid = purcell(&m, 2e9, Polarization::SigmaPlus).unwrap();
    assert!((mid - 1e-3).abs() < 1e-15);
    assert!(purcell(&m, 5e9, Polarization::Pi).is_err());
    assert!(
        LdosModel::from_csv("frequency_hz,P_sigma,P_pi\n2e9,1,1\n1e9,1,1\n".as_bytes()).is_err()
    );
    assert!(LdosModel::from_csv("f,P\n1e9,1\n".as_bytes()).is_err());
}

#[test]
fn wall_loss_floor_formula() {
    let p = pmin_from_conductivity(5.8e7, 30e9).unwrap();
    let want = 4.0 * (2.0 * EPS0 * 2.0 * PI * 30e9 / 5.8e7f64).sqrt();
    assert!((p - want).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channels_nonnegative_and_sum_to_total(n in 40u32..70, t in 0.0f64..300.0, bandstop in any::<bool>()) {
        let m = if bandstop { LdosModel::default_bandstop() } else { LdosModel::FreeSpace };
        let d = total_decay_rate(n, &m, t, n + 6).unwrap();
        prop_assert!(d.channels.iter().all(|c| c.rate >= 0.0));
        let s: f64 = d.channels.iter().map(|c| c.rate).sum();
        prop_assert!((s - d.total).abs() <= 1e-12 * d.total);
    }

    #[test]
    fn lifetime_monotone_in_temperature(n in 40u32..70, t1 in 0.0f64..50.0, dt in 0.0f64..50.0) {
        let m = LdosModel::default_bandstop();
        let a = total_decay_rate(n, &m, t1, n + 6).unwrap().lifetime();
        let b = total_decay_rate(n, &m, t1 + dt, n + 6).unwrap().lifetime();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn zero_temperature_rate_linear_in_pmin(n in 40u32..70, p in 1e-6f64..1e-2) {
        // band wide enough to hold every emission channel
        let lo = LdosModel::bandstop(p, 1e6, 1e13).unwrap();
        let hi = LdosModel::bandstop(10.0 * p, 1e6, 1e13).unwrap();
        let a = total_decay_rate(n, &lo, 0.0, n + 6).unwrap().total;
        let b = total_decay_rate(n, &hi, 0.0, n + 6).unwrap().total;
        prop_assert!((b / a - 10.0).abs() < 1e-10);
    }
}
