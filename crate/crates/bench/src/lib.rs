//! Benchmarks for `unitindex`; see `benches/kernels.rs`.
