//! Criterion benchmarks for spreading-core; see `benches/`.
