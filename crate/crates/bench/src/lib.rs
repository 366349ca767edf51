//! Criterion benchmarks for beamharvest; see `benches/`.
