//! Benchmark-only crate; see `benches/engines.rs`.

pub use lcr_core;
