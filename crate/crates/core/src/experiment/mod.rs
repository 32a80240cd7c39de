//! Instance generation, experiment configuration and batch runs.

pub mod config;
pub mod fixture;
pub mod generate;
pub mod run;

pub use config::{derive_seed, ExperimentConfig, LambdaRecipe};
pub use fixture::{fixture_instance, fixture_layout};
pub use generate::{demand_model, dependency_weights, generate_instance};
pub use run::{run, write_atomic, RunManifest};
