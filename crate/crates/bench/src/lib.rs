//! Criterion benchmarks for `eprsim-core`; see `benches/`.
