//! Criterion benchmarks for the probemul solver live under `benches/`.
