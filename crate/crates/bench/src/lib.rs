//! Criterion benchmarks for the hot paths of `lineqkd`; see `benches/hot_paths.rs`.
