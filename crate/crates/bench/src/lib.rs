//! Criterion benchmarks for the checker. See `benches/`.
