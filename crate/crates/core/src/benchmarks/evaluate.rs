//! Out-of-sample evaluation of a fixed plan.

use rayon::prelude::*;
use serde::Serialize;

use super::scenarios::ScenarioSet;
use crate::error::{Error, Result};
use crate::inner::{h_closed_form, recover_allocation};
use crate::model::{Instance, LocationDecision};

/// Levels reported for every per-scenario statistic, descending.
pub const PERCENTILE_LEVELS: [u32; 4] = [95, 90, 75, 50];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub mean_objective: f64,
    pub std_objective: f64,
    /// `(level, value)` in the order of [`PERCENTILE_LEVELS`].
    pub objective_percentiles: Vec<(u32, f64)>,
    pub mean_unmet: f64,
    pub std_unmet: f64,
    pub unmet_percentiles: Vec<(u32, f64)>,
    pub per_scenario_objective: Vec<f64>,
    pub per_scenario_unmet: Vec<f64>,
}

/// Weighted mean and population standard deviation, summed in scenario order.
pub fn weighted_mean_std(values: &[f64], p: &[f64]) -> (f64, f64) {
    let mean: f64 = values.iter().zip(p).map(|(v, w)| v * w).sum();
    let var: f64 = values
        .iter()
        .zip(p)
        .map(|(v, w)| w * (v - mean).powi(2))
        .sum();
    (mean, var.max(0.0).sqrt())
}

/// Upper-tail order statistic: the smallest value whose cumulative
/// probability (ascending) reaches `q / 100`. With equal weights this is the
/// `ceil(q n / 100)`-th smallest value.
pub fn percentile(values: &[f64], p: &[f64], q: u32) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]).then(a.cmp(b)));
    let uniform = p.windows(2).all(|w| w[0] == w[1]);
    if uniform {
        let n = values.len();
        let rank = (q as usize * n).div_ceil(100);
        return values[order[rank.clamp(1, n) - 1]];
    }
    let target = q as f64 / 100.0;
    let mut acc = 0.0;
    for &i in &order {
        acc += p[i];
        if acc >= target - 1e-12 {
            return values[i];
        }
    }
    values[*order.last().expect("nonempty scenario set")]
}

fn percentiles(values: &[f64], p: &[f64]) -> Vec<(u32, f64)> {
    PERCENTILE_LEVELS
        .iter()
        .map(|q| (*q, percentile(values, p, *q)))
        .collect()
}

/// Scenario-wise objective `f . y + h(y, d)` and unmet demand of a plan.
pub fn evaluate_plan(
    instance: &Instance,
    y_hat: &LocationDecision,
    scenarios: &ScenarioSet,
) -> Result<EvaluationReport> {
    if scenarios.num_customers() != instance.num_customers() {
        return Err(Error::Dimension(format!(
            "scenarios cover {} customers, instance has {}",
            scenarios.num_customers(),
            instance.num_customers()
        )));
    }
    let fixed = instance.opening_cost(y_hat);
    let rows: Vec<(f64, f64)> = scenarios
        .demands
        .par_iter()
        .map(|d| {
            let h = h_closed_form(instance, y_hat, d)?;
            let unmet = recover_allocation(instance, y_hat, d)?.total_unmet();
            Ok((fixed + h, unmet))
        })
        .collect::<Result<_>>()?;
    let (obj, unmet): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let p = &scenarios.probabilities;
    let (mean_objective, std_objective) = weighted_mean_std(&obj, p);
    let (mean_unmet, std_unmet) = weighted_mean_std(&unmet, p);
    Ok(EvaluationReport {
        mean_objective,
        std_objective,
        objective_percentiles: percentiles(&obj, p),
        mean_unmet,
        std_unmet,
        unmet_percentiles: percentiles(&unmet, p),
        per_scenario_objective: obj,
        per_scenario_unmet: unmet,
    })
}
