//! Criterion benchmarks for `ionqrm-core`; see `benches/kernels.rs`.
