//! Criterion benchmarks for theta-forge; see `benches/`.
