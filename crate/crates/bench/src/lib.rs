//! Criterion benchmarks for mlag-core live in `benches/`.
