//! Experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{CompareOptions, TestDistribution};
use crate::error::{Error, Result};
use crate::model::{Support, SupportSpec};
use crate::solvers::{BnbOptions, BoundsRecipe, Method, PlanOptions, SolverChoice};

/// How the dependency weights are derived from the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LambdaRecipe {
    /// `exp(-c_ij / scale)` rescaled so each customer's row sums to `row_sum`.
    Distance { scale: f64, row_sum: f64 },
    /// Weight `1/rho` on the `rho` nearest facilities; the variance weights
    /// are the mean weights times `sigma_scale`.
    Rho { rho: usize, sigma_scale: f64 },
}

impl Default for LambdaRecipe {
    fn default() -> Self {
        LambdaRecipe::Distance {
            scale: 25.0,
            row_sum: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub facilities: usize,
    pub customers: usize,
    /// One instance per seed.
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub penalty: f64,
    pub revenue: f64,
    pub support: SupportSpec,
    /// Robustness level: `eps_mu = kappa * bar_mu`, variance window `1 -/+ kappa`.
    pub kappa: f64,
    pub budget: Option<usize>,
    pub lambda: LambdaRecipe,
    /// Squared coefficient of variation: `bar_sigma^2 = cv * bar_mu^2`.
    pub cv: f64,
    pub test_scenarios: usize,
    pub distribution: TestDistribution,
    pub perturbed_reps: usize,
    pub dual_bounds: BoundsRecipe,
    pub cuts: bool,
    pub solver: SolverChoice,
    /// Write the DDDR model of every instance in LP format.
    pub export_lp: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            facilities: 10,
            customers: 20,
            seeds: vec![1],
            methods: vec![Method::Sp(20), Method::Sp(100), Method::Dr, Method::Dddr],
            penalty: 225.0,
            revenue: 150.0,
            support: SupportSpec {
                min: 1.0,
                max: 100.0,
                step: 1.0,
            },
            kappa: 0.0,
            budget: None,
            lambda: LambdaRecipe::default(),
            cv: 1.0,
            test_scenarios: 1000,
            distribution: TestDistribution::Normal,
            perturbed_reps: 10,
            dual_bounds: BoundsRecipe::Certified,
            cuts: true,
            solver: SolverChoice::Milp,
            export_lp: false,
        }
    }
}

/// Mixes a base seed with a purpose tag so the streams of different stages differ.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag
}

pub const TAG_INSTANCE: u64 = 0;
pub const TAG_TRAINING: u64 = 1;
pub const TAG_TEST: u64 = 2;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.facilities == 0 || self.customers == 0 {
            return bad("need at least one facility and one customer".into());
        }
        if self.seeds.is_empty() || self.methods.is_empty() {
            return bad("seeds and methods must be nonempty".into());
        }
        if !(self.penalty.is_finite() && self.revenue.is_finite()) {
            return bad("penalty and revenue must be finite".into());
        }
        Support::try_from(self.support)?;
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad(format!("kappa must lie in [0, 1], got {}", self.kappa));
        }
        if !(self.cv > 0.0 && self.cv.is_finite()) {
            return bad(format!("cv must be positive, got {}", self.cv));
        }
        match self.lambda {
            LambdaRecipe::Distance { scale, row_sum } => {
                if !(scale > 0.0) || !(row_sum > 0.0 && row_sum < 1.0) {
                    return bad("distance recipe needs scale > 0 and row_sum in (0, 1)".into());
                }
            }
            LambdaRecipe::Rho { rho, sigma_scale } => {
                if rho == 0 || rho > self.facilities {
                    return bad(format!("rho must lie in 1..={}", self.facilities));
                }
                if !(0.0..1.0).contains(&sigma_scale) {
                    return bad("sigma_scale must lie in [0, 1)".into());
                }
            }
        }
        if self.test_scenarios == 0 {
            return bad("test_scenarios must be positive".into());
        }
        if self.distribution == TestDistribution::Perturbed
            && (self.perturbed_reps == 0
                || !self.test_scenarios.is_multiple_of(self.perturbed_reps))
        {
            return bad("perturbed_reps must divide test_scenarios".into());
        }
        if let BoundsRecipe::Uniform(v) = self.dual_bounds {
            if !(v > 0.0 && v.is_finite()) {
                return bad("uniform dual bound must be positive".into());
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn compare_options(&self, seed: u64) -> CompareOptions {
        CompareOptions {
            methods: self.methods.clone(),
            test_scenarios: self.test_scenarios,
            distribution: self.distribution,
            perturbed_reps: self.perturbed_reps,
            test_seed: derive_seed(seed, TAG_TEST),
            plan: self.plan_options(seed),
        }
    }

    pub fn plan_options(&self, seed: u64) -> PlanOptions {
        PlanOptions {
            solver: self.solver,
            budget: self.budget,
            bounds: self.dual_bounds,
            cuts: self.cuts,
            training_seed: derive_seed(seed, TAG_TRAINING),
            max_retries: 6,
            bnb: BnbOptions::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ExperimentConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = ExperimentConfig::from_toml(
            "facilities = 5\ncustomers = 8\nmethods = [\"sp20\", \"dddr\"]\nbudget = 3\n\
             dual_bounds = { uniform = 100.0 }\n[lambda]\nkind = \"rho\"\nrho = 2\nsigma_scale = 0.99\n",
        )
        .unwrap();
        assert_eq!(c.facilities, 5);
        assert_eq!(c.methods, vec![Method::Sp(20), Method::Dddr]);
        assert_eq!(c.budget, Some(3));
        assert_eq!(c.penalty, 225.0);
        assert_eq!(c.dual_bounds, BoundsRecipe::Uniform(100.0));
        assert_eq!(
            c.lambda,
            LambdaRecipe::Rho {
                rho: 2,
                sigma_scale: 0.99
            }
        );
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "facilities = 0",
            "seeds = []",
            "kappa = 2.0",
            "methods = [\"ls\"]",
            "unknown_field = 1",
            "[lambda]\nkind = \"rho\"\nrho = 11\nsigma_scale = 0.5",
            "distribution = \"perturbed\"\nperturbed_reps = 3",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.kappa = 0.1;
        assert_ne!(a.hash(), b.hash());
    }
}
