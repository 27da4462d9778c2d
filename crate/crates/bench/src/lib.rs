//! Intentionally empty: this package only carries the criterion benchmarks
//! under `benches/`.
