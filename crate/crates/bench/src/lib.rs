//! Benchmark-only crate; see `benches/solver_kernels.rs`.
