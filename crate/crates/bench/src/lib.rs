//! Shared inputs for the criterion benches.

use dddr_core::experiment::{generate_instance, ExperimentConfig};
use dddr_core::{DemandModel, Instance, Support};

/// Seeded instance of the given size with the support thinned to `k` points.
pub fn bench_problem(
    facilities: usize,
    customers: usize,
    k: usize,
    seed: u64,
) -> (Instance, DemandModel) {
    let step = 100.0 / k as f64;
    let config = ExperimentConfig {
        facilities,
        customers,
        support: Support::grid(step, 100.0, step).expect("valid grid").spec(),
        ..Default::default()
    };
    generate_instance(&config, seed).expect("generator accepts default config")
}
