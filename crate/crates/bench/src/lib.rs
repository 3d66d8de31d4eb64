//! Criterion benchmarks for the quadrature and model kernels live in `benches/`.
