//! Scenario generation and out-of-sample evaluation of fixed plans.

pub mod compare;
pub mod evaluate;
pub mod scenarios;

pub use compare::{compare_methods, CompareOptions, Comparison, MethodOutcome, TestDistribution};
pub use evaluate::{
    evaluate_plan, percentile, weighted_mean_std, EvaluationReport, PERCENTILE_LEVELS,
};
pub use scenarios::{
    gamma_params, gen_gamma, gen_normal, gen_perturbed, gen_training, PerturbedRep, ScenarioSet,
};
