use proptest::prelude::*;
use rydqc_core::dd_engine::sequence::{
    check_frames, rotation, rotation_via_expm, toggling_frames_so3,
};
use rydqc_core::dd_engine::*;
use rydqc_core::interactions::InteractionCoefficients;
use rydqc_core::quantum_core::*;

fn storage_chain(n: usize) -> SpinChainConfig {
    SpinChainConfig::new(
        n,
        LevelSet::Storage2,
        InteractionCoefficients::reference_table(),
    )
    .unwrap()
}

fn tc(c: &InteractionCoefficients, x: f64) -> f64 {
    x / c.j_ss.abs()
}

fn axis_strategy() -> impl Strategy<Value = (Axis, f64)> {
    (0usize..4, 1u32..3).prop_map(|(a, k)| (Axis::ALL[a], k as f64 * std::f64::consts::FRAC_PI_2))
}

fn rolled(frames: &ToggleFrames, by: usize) -> ToggleFrames {
    let mut f = frames.f.clone();
    let mut beta = frames.beta.clone();
    f.rotate_left(by);
    beta.rotate_left(by);
    ToggleFrames {
        f,
        beta,
        closing: frames.closing,
    }
}

#[test]
fn builtins_close_and_cancel_first_order() {
    let b = builtin_sequences(1e-3, DEFAULT_DUTY).unwrap();
    for k in 1..=3 {
        let seq = b.get(k).unwrap();
        let frames = toggling_frames(seq).unwrap();
        assert_eq!(frames.closing, [0, 0, 1], "sequence {k}");
        let r = check_conditions(seq, 1).unwrap();
        for c in 1..=3 {
            assert!(r.passes(c), "sequence {k} condition {c}: {}", r.residual(c));
        }
    }
}

#[test]
fn seq2_fails_condition_six_at_four_periods() {
    let seq = builtin_by_name("2", 1e-3, DEFAULT_DUTY).unwrap();
    let r = check_conditions(&seq, 4).unwrap();
    assert!(!r.passes(6));
}

#[test]
fn integer_frames_agree_with_so3_frames() {
    let b = builtin_sequences(1e-3, DEFAULT_DUTY).unwrap();
    for k in 1..=3 {
        let seq = b.get(k).unwrap();
        let ints = toggling_frames(seq).unwrap().f;
        let reals = toggling_frames_so3(seq);
        assert_eq!(ints.len(), reals.len());
        for (i, r) in ints.iter().zip(&reals) {
            for mu in 0..3 {
                assert!((i[mu] as f64 - r[mu]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn rotation_matches_exponential() {
    for axis in Axis::ALL {
        for angle in [0.3, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
            let a = rotation(axis, angle);
            let b = rotation_via_expm(axis, angle).unwrap();
            let d = max_abs_diff(&a, &b);
            assert!(d < 1e-12, "{axis:?} {angle} {d}");
        }
    }
}

#[test]
fn parse_roundtrips_text() {
    let seq = builtin_by_name("1", 2e-3, 0.05).unwrap();
    let back = PulseSequence::parse("rt", &seq.to_text(), seq.t_c, seq.duty()).unwrap();
    assert_eq!(back.pulses.len(), seq.pulses.len());
    for (a, b) in back.pulses.iter().zip(&seq.pulses) {
        assert_eq!(a.axis, b.axis);
        assert!((a.angle - b.angle).abs() < 1e-12);
    }
}

#[test]
fn bb1_suppresses_angle_error() {
    let eps = [0.01, 0.02, 0.04];
    let inf: Vec<f64> = eps
        .iter()
        .map(|&e| bb1_sequence(std::f64::consts::PI, e).unwrap().infidelity)
        .collect();
    let slope = loglog_slope(&eps, &inf);
    assert!((slope - 6.0).abs() < 0.2, "slope {slope}");
    let one = bb1_sequence(std::f64::consts::PI, 0.02).unwrap();
    assert!(one.infidelity < one.bare_infidelity);
}

#[test]
fn hamiltonian_is_hermitian_and_cycle_unitary() {
    let cfg = storage_chain(4);
    let h = build_hamiltonian(&cfg, None).unwrap();
    assert!(hermiticity_residual(&h) < 1e-9 * max_abs(&h));
    let c = InteractionCoefficients::reference_table();
    let seq = builtin_by_name("2", tc(&c, 0.021), DEFAULT_DUTY).unwrap();
    let segs = rydqc_core::dd_engine::simulate::cycle_segments(&seq, 0.0).unwrap();
    assert!(!segs.is_empty());
    let gcfg = SpinChainConfig::new(4, LevelSet::Full4, c).unwrap();
    let g = rydqc_core::dd_engine::simulate::gate_propagators(&seq, &gcfg, &GateOptions::default())
        .unwrap();
    for m in [&g.u, &g.u_ref] {
        let p = Propagator {
            matrix: m.clone(),
            elapsed: g.t_gate,
        };
        assert!(p.is_unitary(1e-9), "residual {}", p.unitarity_residual());
    }
}

#[test]
fn storage_error_independent_of_substeps() {
    let c = InteractionCoefficients::reference_table();
    let seq = builtin_by_name("2", tc(&c, 0.042), DEFAULT_DUTY).unwrap();
    let cfg = storage_chain(4);
    let one = simulate_storage(&seq, &cfg, 2, &StorageOptions::default()).unwrap();
    let two = simulate_storage(
        &seq,
        &cfg,
        2,
        &StorageOptions {
            substeps: 2,
            ..Default::default()
        },
    )
    .unwrap();
    for (a, b) in one.exact().iter().zip(two.exact()) {
        assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} vs {b}");
    }
}

#[test]
fn storage_error_grows_with_cycle_time() {
    let c = InteractionCoefficients::reference_table();
    let cfg = storage_chain(4);
    let e: Vec<f64> = [0.021, 0.042]
        .iter()
        .map(|&x| {
            let seq = builtin_by_name("2", tc(&c, x), DEFAULT_DUTY).unwrap();
            simulate_storage(&seq, &cfg, 2, &StorageOptions::default())
                .unwrap()
                .exact()[1]
        })
        .collect();
    assert!(e[1] > e[0] && e[0] > 0.0);
}

#[test]
fn spectator_error_vanishes_without_jz_sa() {
    let mut c = InteractionCoefficients::reference_table();
    c.jz_sa = 0.0;
    let n = 4;
    let cfg = SpinChainConfig::new(n, LevelSet::Full4, c).unwrap();
    let seq = builtin_by_name("2", 1e-3, DEFAULT_DUTY).unwrap();
    let g = rydqc_core::dd_engine::simulate::gate_propagators(&seq, &cfg, &GateOptions::default())
        .unwrap();
    let (g1, g2) = rydqc_core::dd_engine::simulate::gate_pair(n);
    // spectators pinned to |0s⟩, gate pair free within {0s, 1s}
    let sub: Vec<usize> = g
        .subspace
        .iter()
        .copied()
        .filter(|&idx| {
            (0..n)
                .filter(|&s| s != g1 && s != g2)
                .all(|s| (idx / 4usize.pow((n - 1 - s) as u32)).is_multiple_of(4))
        })
        .collect();
    assert_eq!(sub.len(), 4);
    let w = relative_block(
        &Propagator {
            matrix: g.u.clone(),
            elapsed: g.t_gate,
        },
        &Propagator {
            matrix: g.u_ref.clone(),
            elapsed: g.t_gate,
        },
        Some(&sub),
    )
    .unwrap();
    let e = haar_average_error(&w, 1);
    assert!(e < 1e-10, "spectator error {e}");
}

#[test]
fn motion_result_is_seed_deterministic() {
    let c = InteractionCoefficients::reference_table();
    let cfg = storage_chain(3);
    let mut m = MotionConfig::new(10e-6, 2.0 * std::f64::consts::PI * 20e3, 1e-3).unwrap();
    m.samples = 10;
    let seq = builtin_by_name("2", tc(&c, 0.021), DEFAULT_DUTY).unwrap();
    let a = simulate_with_motion(&seq, &cfg, &m, &MotionChannel::ALL, 1).unwrap();
    let b = simulate_with_motion(&seq, &cfg, &m, &MotionChannel::ALL, 1).unwrap();
    assert_eq!(a.total.mean, b.total.mean);
    assert!(a.total.mean >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditions_invariant_under_time_translation(ops in prop::collection::vec(axis_strategy(), 2..8), n_periods in 1u32..6, by in 0usize..8) {
        let seq = PulseSequence::equidistant("p", &ops, 1e-3, 0.0).unwrap();
        let frames = toggling_frames(&seq).unwrap();
        let shifted = rolled(&frames, by % frames.f.len());
        let a = check_frames(&frames, n_periods);
        let b = check_frames(&shifted, n_periods);
        for i in 1..=8 {
            prop_assert!((a.residual(i) - b.residual(i)).abs() < 1e-9);
            prop_assert_eq!(a.passes(i), b.passes(i));
        }
    }

    #[test]
    fn frames_are_signed_unit_vectors(ops in prop::collection::vec(axis_strategy(), 1..10)) {
        let seq = PulseSequence::equidistant("p", &ops, 1e-3, 0.0).unwrap();
        let frames = toggling_frames(&seq).unwrap();
        for r in frames.f.iter().chain(std::iter::once(&frames.closing)) {
            prop_assert_eq!(r.iter().map(|x| x.abs() as i32).sum::<i32>(), 1);
        }
        // closing frame is the image of +z under the whole cycle
        let last = toggling_frames_so3(&seq);
        prop_assert_eq!(last.len(), frames.f.len());
    }

    #[test]
    fn inverse_undoes_sequence(ops in prop::collection::vec(axis_strategy(), 1..8)) {
        let seq = PulseSequence::equidistant("p", &ops, 1e-3, 0.0).unwrap();
        let both = seq.append(&seq.inverse(), "pp");
        prop_assert_eq!(toggling_frames(&both).unwrap().closing, [0, 0, 1]);
    }
}
