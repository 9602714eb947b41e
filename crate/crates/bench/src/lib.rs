//! Criterion benchmarks for the hot paths of `macsi-core`; see `benches/`.
