use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rydqc_core::quantum_core::*;

fn random_matrix(d: usize, vals: &[f64]) -> CMat {
    Array2::from_shape_fn((d, d), |(i, j)| {
        C64::new(
            vals[(i * d + j) % vals.len()],
            vals[(i * d + j + 7) % vals.len()],
        )
    })
}

fn hermitian(d: usize, vals: &[f64]) -> CMat {
    let a = random_matrix(d, vals);
    (&a + &dagger(&a)).mapv(|z| z * 0.5)
}

fn random_unitary(d: usize, vals: &[f64], t: f64) -> CMat {
    expm_hermitian(&hermitian(d, vals), t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn embed_is_linear(vals in prop::collection::vec(-1.0f64..1.0, 32), a in -2.0f64..2.0, b in -2.0f64..2.0, site in 0usize..3) {
        let (x, y) = (random_matrix(2, &vals[..16]), random_matrix(2, &vals[16..]));
        let lhs = embed_operator(&(x.mapv(|z| z * a) + y.mapv(|z| z * b)), site, 3, 2).unwrap();
        let rhs = embed_operator(&x, site, 3, 2).unwrap().mapv(|z| z * a) + embed_operator(&y, site, 3, 2).unwrap().mapv(|z| z * b);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn error_invariant_under_shared_basis_change(vals in prop::collection::vec(-1.0f64..1.0, 48), seed in 0u64..1000) {
        let d = 4;
        let u = Propagator { matrix: random_unitary(d, &vals[..16], 0.3), elapsed: 0.0 };
        let ur = Propagator { matrix: random_unitary(d, &vals[16..32], 0.1), elapsed: 0.0 };
        let v = random_unitary(d, &vals[32..], 1.7);
        let vu = Propagator { matrix: v.dot(&u.matrix), elapsed: 0.0 };
        let vur = Propagator { matrix: v.dot(&ur.matrix), elapsed: 0.0 };
        let a = average_error_per_atom(&u, &ur, 2, 10, seed, None).unwrap();
        let b = average_error_per_atom(&vu, &vur, 2, 10, seed, None).unwrap();
        prop_assert!((a.mean - b.mean).abs() < 1e-12);
        let wa = relative_block(&u, &ur, None).unwrap();
        let wb = relative_block(&vu, &vur, None).unwrap();
        prop_assert!((haar_average_error(&wa, 2) - haar_average_error(&wb, 2)).abs() < 1e-12);
    }

    #[test]
    fn negated_hamiltonian_gives_adjoint(vals in prop::collection::vec(-1.0f64..1.0, 32), dts in prop::collection::vec(0.0f64..2.0, 1..4)) {
        let hs: Vec<CMat> = (0..dts.len()).map(|k| hermitian(4, &vals[k..])).collect();
        let fwd: Vec<(CMat, f64)> = hs.iter().cloned().zip(dts.iter().copied()).collect();
        let bwd: Vec<(CMat, f64)> = hs.iter().map(|h| h.mapv(|z| -z)).zip(dts.iter().copied()).collect();
        let u = propagate(&fwd).unwrap();
        let w = propagate(&bwd).unwrap();
        // exp(+iHt) = conj-transpose of exp(−iHt) for each factor; the product reverses order,
        // so compare single segments and the unitarity of the whole.
        if dts.len() == 1 {
            prop_assert!(max_abs_diff(&w.matrix, &dagger(&u.matrix)) < 1e-10);
        }
        let rev: Vec<(CMat, f64)> = bwd.iter().rev().cloned().collect();
        let back = propagate(&rev).unwrap();
        prop_assert!(max_abs_diff(&back.matrix, &dagger(&u.matrix)) < 1e-10);
        prop_assert!(u.is_unitary(1e-10) && w.is_unitary(1e-10));
    }

    #[test]
    fn propagation_preserves_norm(vals in prop::collection::vec(-1.0f64..1.0, 24), seed in 0u64..100, t in 0.0f64..5.0) {
        let u = propagate(&[(hermitian(4, &vals), t)]).unwrap();
        let psi = StateVector::new(haar_vector(4, seed, 0).unwrap(), 2, 2).unwrap();
        let out = psi.evolve(&u).unwrap();
        let norm: f64 = out.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }
}

#[test]
fn haar_closed_form_matches_monte_carlo() {
    let vals: Vec<f64> = (0..32)
        .map(|k| ((k * 37 % 17) as f64 - 8.0) / 9.0)
        .collect();
    let u = Propagator {
        matrix: random_unitary(8, &vals, 0.05),
        elapsed: 0.0,
    };
    let id = Propagator::identity(8);
    let mc = average_error_per_atom(&u, &id, 3, 4000, 7, None).unwrap();
    let exact = haar_average_error(&relative_block(&u, &id, None).unwrap(), 3);
    assert!(
        (mc.mean - exact).abs() < 4.0 * mc.sem,
        "mc {} ± {} vs {}",
        mc.mean,
        mc.sem,
        exact
    );
}

#[test]
fn sampling_is_deterministic_per_stream() {
    let a = haar_vector(16, 42, 3).unwrap();
    let b = haar_vector(16, 42, 3).unwrap();
    let c = haar_vector(16, 42, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn loglog_slope_recovers_power() {
    let x: Vec<f64> = (1..6).map(|k| k as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-2.5)).collect();
    assert!((loglog_slope(&x, &y) + 2.5).abs() < 1e-12);
}
