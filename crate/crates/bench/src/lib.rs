//! Benchmarks for the coneharm pipelines; see `benches/`.
