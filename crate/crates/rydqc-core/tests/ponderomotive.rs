use proptest::prelude::*;
use rydqc_core::ponderomotive::*;
use std::f64::consts::PI;

const E: f64 = 1.602_176_634e-19;
const EPS0: f64 = 8.854_187_812_8e-12;
const C: f64 = 299_792_458.0;
const ME: f64 = 9.109_383_701_5e-31;
const HBAR: f64 = 1.054_571_817e-34;

#[test]
fn gaussian_constant_matches_closed_form() {
    // U/P at the focus of a beam with w0 = λ, independent of λ
    let closed =
        E * E / (4.0 * PI.powi(3) * EPS0 * C.powi(3) * ME * HBAR) / (2.0 * PI) / 1e6 * 1e-3;
    assert!((closed - 1.4375).abs() < 1e-3, "{closed}");
    for lambda in [532e-9, 1064e-9] {
        let beam = GaussianBeam {
            waist: lambda,
            wavelength: lambda,
            power: 1e-3,
        };
        let u = pond_shift(3, beam.omega(), &|p| beam.intensity(p), [0.0; 3]).unwrap();
        let mhz = u / (2.0 * PI) / 1e6;
        assert!((mhz / closed - 1.0).abs() < 1e-3, "{mhz} vs {closed}");
    }
}

/// Dense midpoint quadrature over the closed-form circular density.
fn depth_factor_oracle(n: u32, k: f64, in_plane: bool) -> f64 {
    let a0 = 5.291_772_109_03e-11;
    let nf = n as f64;
    let l = nf - 1.0;
    let mean = (2.0 * nf + 1.0) * nf / 2.0;
    let sd = (2.0 * nf + 1.0).sqrt() * nf / 2.0;
    let (r0, r1) = ((mean - 12.0 * sd).max(0.0), mean + 12.0 * sd);
    let ts = 12.0 / (2.0 * l + 1.0).sqrt();
    let (t0, t1) = (PI / 2.0 - ts, PI / 2.0 + ts);
    let (nr, nt) = (1500, 1500);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..nr {
        let r = r0 + (i as f64 + 0.5) * (r1 - r0) / nr as f64;
        let wr = (2.0 * nf * (r / mean).ln() - 2.0 * (r - mean) / nf).exp();
        for j in 0..nt {
            let t = t0 + (j as f64 + 0.5) * (t1 - t0) / nt as f64;
            let w = wr * t.sin().powf(2.0 * l + 1.0);
            let kr = k * r * a0;
            let f = if in_plane {
                libm::j0(kr * t.sin())
            } else {
                (kr * t.cos()).cos()
            };
            num += w * f;
            den += w;
        }
    }
    num / den
}

#[test]
fn lattice_factor_matches_dense_quadrature() {
    for (o, in_plane) in [
        (LatticeOrientation::InPlane, true),
        (LatticeOrientation::ZAxis, false),
    ] {
        let l = LatticeSpec::new(629e-9, o, None).unwrap();
        let got = lattice_depth_factor(59, &l);
        let want = depth_factor_oracle(59, 2.0 * PI / l.period, in_plane);
        assert!((got - want).abs() < 1e-4, "{o:?}: {got} vs {want}");
    }
}

#[test]
fn lg_one_peaks_at_waist_over_root_two() {
    let beam = LgBeam::new(1, 2e-6, 1064e-9, 1e-3).unwrap();
    let (mut best, mut r_best) = (0.0, 0.0);
    for i in 1..4000 {
        let r = i as f64 * 1e-9;
        let a = lg_field(&beam, r, 0.0).norm();
        if a > best {
            best = a;
            r_best = r;
        }
    }
    assert!((r_best - beam.waist / 2f64.sqrt()).abs() < 2e-9, "{r_best}");
}

#[test]
fn lg_power_normalization() {
    let beam = LgBeam::new(2, 1.5e-6, 800e-9, 2e-3).unwrap();
    let n = 20000;
    let dr = 8.0 * beam.waist / n as f64;
    let p: f64 = (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            0.5 * EPS0 * C * lg_field(&beam, r, 0.0).norm_sqr() * 2.0 * PI * r * dr
        })
        .sum();
    assert!((p / beam.power - 1.0).abs() < 1e-6, "{p}");
}

#[test]
fn thomson_state_change_error_per_pi() {
    let omega = 2.0 * PI * C / 532e-9;
    let t = thomson_errors(omega, 2.0 * PI * 1e6).unwrap();
    assert!(
        (t.error_per_pi - 5.58e-7).abs() < 0.01e-7,
        "{}",
        t.error_per_pi
    );
}

#[test]
fn magic_roots_are_consistent_with_depth_factors() {
    let s = find_magic_wavelengths(
        (59, 61),
        (56, 64),
        LatticeOrientation::InPlane,
        (626e-9, 632e-9),
        12,
    )
    .unwrap();
    assert!(!s.eta_a_roots.is_empty() && !s.eta_s_roots.is_empty());
    for p in s.eta_a_roots.iter().chain(&s.eta_s_roots) {
        let l = LatticeSpec::new(p.wavelength, LatticeOrientation::InPlane, None).unwrap();
        let f = |n| lattice_depth_factor(n, &l);
        assert!((p.eta_a - (f(64) - f(56)) / f(56)).abs() < 1e-9);
        assert!((p.eta_s - (f(61) - f(59)) / f(59)).abs() < 1e-9);
    }
    let a = s.eta_a_roots[0].wavelength;
    assert!((a - 628.99e-9).abs() < 0.05e-9, "{a}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn depth_factor_bounded(n in 20u32..80, lambda_nm in 300.0f64..2000.0, stretch in 1.0f64..3.0, z in any::<bool>()) {
        let o = if z { LatticeOrientation::ZAxis } else { LatticeOrientation::InPlane };
        let l = LatticeSpec::new(lambda_nm * 1e-9, o, Some(stretch * lambda_nm * 1e-9 / 2.0)).unwrap();
        let f = lattice_depth_factor(n, &l);
        prop_assert!((-1.0..=1.0).contains(&f));
    }

    #[test]
    fn shift_scales_as_inverse_omega_squared(l1 in 400e-9f64..1600e-9, l2 in 400e-9f64..1600e-9) {
        let beam = GaussianBeam { waist: 2e-6, wavelength: 1e-6, power: 1e-3 };
        let i = |p: [f64; 3]| beam.intensity(p);
        let (w1, w2) = (2.0 * PI * C / l1, 2.0 * PI * C / l2);
        let u1 = pond_shift(40, w1, &i, [0.3e-6, 0.0, 0.0]).unwrap();
        let u2 = pond_shift(40, w2, &i, [0.3e-6, 0.0, 0.0]).unwrap();
        prop_assert!((u1 / u2 - (w2 / w1).powi(2)).abs() < 1e-10 * (w2 / w1).powi(2));
    }

    #[test]
    fn ring_rabi_is_bilinear_in_amplitudes(a in 0.1f64..3.0, b in 0.1f64..3.0) {
        let b1 = LgBeam::new(0, 1.5e-6, 1064e-9, 1e-3).unwrap();
        let b2 = LgBeam::new(2, 1.5e-6, 1064e-9, 1e-3).unwrap();
        let base = pond_rabi(58, 60, &b1, &b2, [0.0; 3]).unwrap().ring;
        let s1 = LgBeam { power: b1.power * a * a, ..b1 };
        let s2 = LgBeam { power: b2.power * b * b, ..b2 };
        let scaled = pond_rabi(58, 60, &s1, &s2, [0.0; 3]).unwrap().ring;
        prop_assert!((scaled - a * b * base).abs() <= 1e-12 * (a * b * base).abs());
    }
}
