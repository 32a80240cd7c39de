//! Random instances on the unit square scaled to `[0, 100]^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{derive_seed, ExperimentConfig, LambdaRecipe, TAG_INSTANCE};
use crate::error::Result;
use crate::model::{
    apply_robustness_level, ensure_valid, lambda_from_distance, lambda_rho_means, Customer,
    DemandModel, Facility, Instance, Support,
};

pub const COORD_MAX: f64 = 100.0;
pub const OPEN_COST: (f64, f64) = (5000.0, 10000.0);
pub const CAPACITY: (f64, f64) = (10.0, 20.0);
pub const MEAN_DEMAND: (f64, f64) = (20.0, 40.0);

/// Dependency weights for an instance under a recipe.
pub fn dependency_weights(
    instance: &Instance,
    recipe: &LambdaRecipe,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    match *recipe {
        LambdaRecipe::Distance { scale, row_sum } => lambda_from_distance(instance, scale, row_sum),
        LambdaRecipe::Rho { rho, sigma_scale } => {
            let (mu, sigma) = lambda_rho_means(instance, rho)?;
            let sigma = sigma
                .into_iter()
                .map(|row| row.into_iter().map(|v| v * sigma_scale).collect())
                .collect();
            Ok((mu, sigma))
        }
    }
}

/// Attaches demand moments, weights and radii to a geometry.
pub fn demand_model(
    instance: &Instance,
    bar_mu: Vec<f64>,
    config: &ExperimentConfig,
) -> Result<DemandModel> {
    let bar_sigma = bar_mu.iter().map(|m| m * config.cv.sqrt()).collect();
    let support = Support::try_from(config.support)?;
    let base =
        DemandModel::decision_independent(bar_mu, bar_sigma, instance.num_facilities(), support);
    let (lm, ls) = dependency_weights(instance, &config.lambda)?;
    apply_robustness_level(&base.with_lambda(lm, ls), config.kappa)
}

/// Draws an instance: coordinates, then opening costs and capacities, then
/// mean demands, all from one seeded stream.
pub fn generate_instance(config: &ExperimentConfig, seed: u64) -> Result<(Instance, DemandModel)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_INSTANCE));
    let point = |rng: &mut ChaCha8Rng| {
        (
            rng.random_range(0.0..=COORD_MAX),
            rng.random_range(0.0..=COORD_MAX),
        )
    };
    let facilities: Vec<Facility> = (0..config.facilities)
        .map(|i| {
            let (x, y) = point(&mut rng);
            Facility {
                id: i + 1,
                x,
                y,
                open_cost: rng.random_range(OPEN_COST.0..=OPEN_COST.1),
                capacity: rng.random_range(CAPACITY.0..=CAPACITY.1),
            }
        })
        .collect();
    let mut bar_mu = Vec::with_capacity(config.customers);
    let customers: Vec<Customer> = (0..config.customers)
        .map(|j| {
            let (x, y) = point(&mut rng);
            bar_mu.push(rng.random_range(MEAN_DEMAND.0..=MEAN_DEMAND.1));
            Customer {
                id: j + 1,
                x,
                y,
                penalty: config.penalty,
                revenue: config.revenue,
            }
        })
        .collect();
    let instance = Instance::from_coordinates(facilities, customers, 1.0);
    let model = demand_model(&instance, bar_mu, config)?;
    ensure_valid(&instance, &model)?;
    Ok((instance, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::variance_of;
    use crate::LocationDecision;

    #[test]
    fn same_seed_same_instance() {
        let c = ExperimentConfig::default();
        assert_eq!(
            generate_instance(&c, 7).unwrap(),
            generate_instance(&c, 7).unwrap()
        );
        assert_ne!(
            generate_instance(&c, 7).unwrap().0,
            generate_instance(&c, 8).unwrap().0
        );
    }

    #[test]
    fn draws_stay_in_their_ranges() {
        let c = ExperimentConfig::default();
        for seed in 0..20 {
            let (inst, model) = generate_instance(&c, seed).unwrap();
            assert_eq!(inst.num_facilities(), 10);
            assert_eq!(inst.num_customers(), 20);
            for f in &inst.facilities {
                assert!((5000.0..=10000.0).contains(&f.open_cost));
                assert!((10.0..=20.0).contains(&f.capacity));
                assert!((0.0..=100.0).contains(&f.x) && (0.0..=100.0).contains(&f.y));
            }
            for (j, cu) in inst.customers.iter().enumerate() {
                assert_eq!((cu.penalty, cu.revenue), (225.0, 150.0));
                assert!((20.0..=40.0).contains(&model.bar_mu[j]));
                assert_eq!(model.bar_sigma[j], model.bar_mu[j]);
                let row: f64 = model.lambda_mu[j].iter().sum();
                assert!((row - 0.99).abs() < 1e-12);
            }
            assert_eq!(model.support.len(), 100);
        }
    }

    #[test]
    fn cv_is_squared() {
        let c = ExperimentConfig {
            cv: 0.1,
            ..Default::default()
        };
        let (_, model) = generate_instance(&c, 3).unwrap();
        let closed = LocationDecision::closed(10);
        for j in 0..20 {
            let v = variance_of(&model, &closed, j).unwrap();
            assert!((v - 0.1 * model.bar_mu[j].powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn rho_recipe_scales_variance_weights() {
        let c = ExperimentConfig {
            lambda: LambdaRecipe::Rho {
                rho: 2,
                sigma_scale: 0.99,
            },
            ..Default::default()
        };
        let (_, model) = generate_instance(&c, 4).unwrap();
        for j in 0..20 {
            assert_eq!(model.lambda_mu[j].iter().filter(|v| **v == 0.5).count(), 2);
            let s: f64 = model.lambda_sigma[j].iter().sum();
            assert!((s - 0.99).abs() < 1e-12);
        }
    }
}
