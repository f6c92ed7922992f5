//! Criterion benchmarks for the loss catalogue and the training stack;
//! see the `benches/` directory. No library code lives here.
