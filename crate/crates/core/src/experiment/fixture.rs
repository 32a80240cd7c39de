//! Published 10-facility, 20-customer layout.
//!
//! Only the coordinates are known; opening costs, capacities and demand
//! moments must be supplied or drawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{derive_seed, ExperimentConfig, TAG_INSTANCE};
use super::generate::{demand_model, CAPACITY, MEAN_DEMAND, OPEN_COST};
use crate::error::{Error, Result};
use crate::model::{Customer, DemandModel, Facility, Instance};

pub const FACILITY_SITES: [(f64, f64); 10] = [
    (54.0, 27.0),
    (42.0, 84.0),
    (0.0, 12.0),
    (67.0, 82.0),
    (13.0, 57.0),
    (89.0, 20.0),
    (18.0, 10.0),
    (21.0, 97.0),
    (81.0, 17.0),
    (81.0, 27.0),
];

pub const CUSTOMER_SITES: [(f64, f64); 20] = [
    (43.0, 94.0),
    (81.0, 33.0),
    (17.0, 37.0),
    (0.0, 25.0),
    (79.0, 1.0),
    (59.0, 60.0),
    (10.0, 38.0),
    (3.0, 89.0),
    (98.0, 5.0),
    (89.0, 57.0),
    (74.0, 63.0),
    (58.0, 2.0),
    (21.0, 54.0),
    (76.0, 25.0),
    (28.0, 85.0),
    (97.0, 88.0),
    (35.0, 59.0),
    (35.0, 34.0),
    (17.0, 23.0),
    (4.0, 50.0),
];

/// The layout with Euclidean costs; opening costs and capacities are zero
/// placeholders.
pub fn fixture_layout(penalty: f64, revenue: f64) -> Instance {
    let facilities = FACILITY_SITES
        .iter()
        .enumerate()
        .map(|(i, (x, y))| Facility {
            id: i + 1,
            x: *x,
            y: *y,
            open_cost: 0.0,
            capacity: 0.0,
        })
        .collect();
    let customers = CUSTOMER_SITES
        .iter()
        .enumerate()
        .map(|(j, (x, y))| Customer {
            id: j + 1,
            x: *x,
            y: *y,
            penalty,
            revenue,
        })
        .collect();
    Instance::from_coordinates(facilities, customers, 1.0)
}

/// Fills the missing data of the layout from the generator's ranges.
/// `facilities` and `customers` in the config are ignored.
pub fn fixture_instance(config: &ExperimentConfig, seed: u64) -> Result<(Instance, DemandModel)> {
    let config = ExperimentConfig {
        facilities: FACILITY_SITES.len(),
        customers: CUSTOMER_SITES.len(),
        ..config.clone()
    };
    config.validate()?;
    let mut inst = fixture_layout(config.penalty, config.revenue);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_INSTANCE));
    for f in &mut inst.facilities {
        f.open_cost = rng.random_range(OPEN_COST.0..=OPEN_COST.1);
        f.capacity = rng.random_range(CAPACITY.0..=CAPACITY.1);
    }
    let bar_mu = (0..inst.num_customers())
        .map(|_| rng.random_range(MEAN_DEMAND.0..=MEAN_DEMAND.1))
        .collect();
    let model = demand_model(&inst, bar_mu, &config)?;
    if model.num_customers() != inst.num_customers() {
        return Err(Error::Dimension("fixture demand model size".into()));
    }
    Ok((inst, model))
}
