//! Criterion benchmarks for `pss-core`; see `benches/`.
