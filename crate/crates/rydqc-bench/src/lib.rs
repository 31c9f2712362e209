//! Criterion benchmarks for the rydqc numerical kernels live in `benches/`.
