//! Benchmark-only crate; see `benches/scaling.rs`.
