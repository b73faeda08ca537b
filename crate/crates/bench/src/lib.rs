//! Shared inputs for the benchmarks.

use wim_core::model::sample_one;
use wim_core::{l1_metric, Distribution, MetricGeometry, ModelSpec};

/// The 3x3 table with entries 2, 3, 5, ..., 23 percent.
pub fn worked_example() -> (ModelSpec, MetricGeometry, Distribution) {
    let model = ModelSpec::segre(&[3, 3]).expect("valid sizes");
    let geom = MetricGeometry::new(&l1_metric(&[3, 3]).expect("valid sizes")).expect("small lattice");
    let mu = Distribution::from_weights(&[2, 3, 5, 7, 11, 13, 17, 19, 23]).expect("positive weights");
    (model, geom, mu)
}

/// `count` seeded samples from the simplex on `n` points.
pub fn samples(n: usize, count: usize) -> Vec<Distribution> {
    (0..count as u64).map(|i| sample_one(n, 0, i)).collect()
}
