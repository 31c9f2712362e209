use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rydqc_core::dd_engine::sequence::{
    builtin_by_name, check_conditions, DEFAULT_DUTY, DEFAULT_TC_JSS,
};
use rydqc_core::dd_engine::{
    build_hamiltonian, simulate_storage, LevelSet, SpinChainConfig, StorageOptions,
};
use rydqc_core::interactions::{CircularPair, InteractionCoefficients, PairWindows};
use rydqc_core::ponderomotive::{
    lattice_depth_factor, pond_shift, GaussianBeam, LatticeOrientation, LatticeSpec,
};
use rydqc_core::quantum_core::expm_hermitian;
use rydqc_core::FieldConfig;
use std::hint::black_box;

fn expm(c: &mut Criterion) {
    let mut g = c.benchmark_group("expm_hermitian");
    for n in [4usize, 6, 8] {
        let cfg = SpinChainConfig::new(
            n,
            LevelSet::Storage2,
            InteractionCoefficients::reference_table(),
        )
        .unwrap();
        let h = build_hamiltonian(&cfg, None).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(1 << n), &h, |b, h| {
            b.iter(|| expm_hermitian(black_box(h), 1e-6).unwrap())
        });
    }
    g.finish();
}

fn pair_solve(c: &mut Criterion) {
    let pair = CircularPair::new(59, 61, &PairWindows::default()).unwrap();
    let f = FieldConfig::new(0.313, 1.39).unwrap();
    let mut g = c.benchmark_group("pair");
    g.sample_size(10);
    g.bench_function("solve_59_61_12um", |b| {
        b.iter(|| pair.solve(black_box([12e-6, 0.0, 0.0]), &f).unwrap())
    });
    g.finish();
}

fn storage_cycle(c: &mut Criterion) {
    let co = InteractionCoefficients::reference_table();
    let cfg = SpinChainConfig::new(6, LevelSet::Storage2, co).unwrap();
    let seq = builtin_by_name("2", DEFAULT_TC_JSS / co.j_ss.abs(), DEFAULT_DUTY).unwrap();
    let opts = StorageOptions {
        samples: 10,
        ..Default::default()
    };
    let mut g = c.benchmark_group("storage");
    g.sample_size(10);
    g.bench_function("sequence2_6_atoms_1_cycle", |b| {
        b.iter(|| simulate_storage(&seq, &cfg, 1, &opts).unwrap())
    });
    g.finish();
}

fn sequence_conditions(c: &mut Criterion) {
    let seq = builtin_by_name("2", 1.0, DEFAULT_DUTY).unwrap();
    c.bench_function("check_conditions_sequence2", |b| {
        b.iter(|| check_conditions(black_box(&seq), 4).unwrap())
    });
}

fn ponderomotive(c: &mut Criterion) {
    let beam = GaussianBeam {
        waist: 1e-6,
        wavelength: 1064e-9,
        power: 1e-3,
    };
    c.bench_function("pond_shift_gaussian_n60", |b| {
        b.iter(|| {
            pond_shift(
                60,
                beam.omega(),
                &|p| beam.intensity(p),
                black_box([0.2e-6, 0.0, 0.0]),
            )
            .unwrap()
        })
    });
    let l = LatticeSpec::new(629e-9, LatticeOrientation::InPlane, None).unwrap();
    c.bench_function("lattice_depth_factor_n59", |b| {
        b.iter(|| lattice_depth_factor(black_box(59), &l))
    });
}

criterion_group!(
    kernels,
    expm,
    pair_solve,
    storage_cycle,
    sequence_conditions,
    ponderomotive
);
criterion_main!(kernels);
