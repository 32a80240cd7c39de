//! Side-by-side out-of-sample comparison of SP, DR and DDDR plans.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_plan, EvaluationReport};
use super::scenarios::{gen_gamma, gen_normal, gen_perturbed, ScenarioSet};
use crate::error::{Error, Result};
use crate::model::{DemandModel, Instance, LocationDecision};
use crate::solvers::plan::{solve_plan, Method, Plan, PlanOptions};

/// Distribution of the out-of-sample demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestDistribution {
    Normal,
    Gamma,
    /// Normal with moments redrawn inside the ambiguity window per repetition.
    Perturbed,
}

impl std::str::FromStr for TestDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(TestDistribution::Normal),
            "gamma" => Ok(TestDistribution::Gamma),
            "perturbed" => Ok(TestDistribution::Perturbed),
            _ => Err(Error::Config(format!(
                "unknown distribution {s:?} (expected normal, gamma or perturbed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareOptions {
    pub methods: Vec<Method>,
    pub test_scenarios: usize,
    pub distribution: TestDistribution,
    /// Repetitions for [`TestDistribution::Perturbed`]; must divide `test_scenarios`.
    pub perturbed_reps: usize,
    /// Shared by the test sets of every plan.
    pub test_seed: u64,
    pub plan: PlanOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            methods: vec![Method::Sp(20), Method::Sp(100), Method::Dr, Method::Dddr],
            test_scenarios: 1000,
            distribution: TestDistribution::Normal,
            perturbed_reps: 10,
            test_seed: 0,
            plan: PlanOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub plan: Plan,
    pub report: EvaluationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub outcomes: Vec<MethodOutcome>,
}

/// Test set for a plan: moments follow the plan, the seed is shared.
pub fn test_scenarios(
    model: &DemandModel,
    y: &LocationDecision,
    opts: &CompareOptions,
) -> Result<ScenarioSet> {
    match opts.distribution {
        TestDistribution::Normal => gen_normal(model, y, opts.test_scenarios, opts.test_seed),
        TestDistribution::Gamma => gen_gamma(model, y, opts.test_scenarios, opts.test_seed),
        TestDistribution::Perturbed => {
            let reps = opts.perturbed_reps;
            if reps == 0 || !opts.test_scenarios.is_multiple_of(reps) {
                return Err(Error::InvalidParameter(format!(
                    "{} test scenarios cannot be split into {reps} repetitions",
                    opts.test_scenarios
                )));
            }
            let per_rep = opts.test_scenarios / reps;
            Ok(gen_perturbed(model, y, reps, per_rep, opts.test_seed)?.0)
        }
    }
}

/// Trains every method, then evaluates each plan on its own test set drawn
/// from the decision-dependent (true) model.
pub fn compare_methods(
    instance: &Instance,
    model: &DemandModel,
    opts: &CompareOptions,
) -> Result<Comparison> {
    let mut outcomes = Vec::with_capacity(opts.methods.len());
    for &m in &opts.methods {
        let plan = solve_plan(instance, model, m, &opts.plan)?;
        log::info!(
            "{m}: open {:?}, objective {:.3}",
            plan.open_facilities,
            plan.objective
        );
        let test = test_scenarios(model, &plan.y, opts)?;
        let report = evaluate_plan(instance, &plan.y, &test)?;
        outcomes.push(MethodOutcome { plan, report });
    }
    Ok(Comparison { outcomes })
}

/// Statistic names, in report order.
pub fn statistic_names() -> Vec<String> {
    let mut out = vec!["mean_objective".to_string(), "std_objective".to_string()];
    out.extend(
        super::PERCENTILE_LEVELS
            .iter()
            .map(|q| format!("objective_p{q}")),
    );
    out.push("mean_unmet".into());
    out.push("std_unmet".into());
    out.extend(
        super::PERCENTILE_LEVELS
            .iter()
            .map(|q| format!("unmet_p{q}")),
    );
    out
}

/// Statistic values in the order of [`statistic_names`].
pub fn statistic_values(r: &EvaluationReport) -> Vec<f64> {
    let mut out = vec![r.mean_objective, r.std_objective];
    out.extend(r.objective_percentiles.iter().map(|(_, v)| *v));
    out.push(r.mean_unmet);
    out.push(r.std_unmet);
    out.extend(r.unmet_percentiles.iter().map(|(_, v)| *v));
    out
}

impl Comparison {
    pub fn outcome(&self, m: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.plan.method == m)
    }

    /// `(statistic, method, value)` grouped by statistic.
    pub fn long_rows(&self) -> Vec<(String, Method, f64)> {
        let values: Vec<Vec<f64>> = self
            .outcomes
            .iter()
            .map(|o| statistic_values(&o.report))
            .collect();
        let mut rows = Vec::new();
        for (k, name) in statistic_names().into_iter().enumerate() {
            for (o, v) in self.outcomes.iter().zip(&values) {
                rows.push((name.clone(), o.plan.method, v[k]));
            }
        }
        rows
    }

    /// CSV with header `method,statistic,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["method", "statistic", "value"])?;
        for (stat, m, v) in self.long_rows() {
            w.write_record([m.to_string(), stat, format!("{v}")])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Fixed-width table: one row per statistic, one column per method.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<16}", "statistic");
        for o in &self.outcomes {
            let _ = write!(out, "{:>14}", o.plan.method.label());
        }
        out.push('\n');
        let values: Vec<Vec<f64>> = self
            .outcomes
            .iter()
            .map(|o| statistic_values(&o.report))
            .collect();
        for (k, name) in statistic_names().iter().enumerate() {
            let _ = write!(out, "{name:<16}");
            for v in &values {
                let _ = write!(out, "{:>14.2}", v[k]);
            }
            out.push('\n');
        }
        out.push_str("open facilities\n");
        for o in &self.outcomes {
            let _ = writeln!(
                out,
                "  {:<8} {:?}",
                o.plan.method.label(),
                o.plan.open_facilities
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Customer, Facility, Support};
    use crate::solvers::plan::SolverChoice;

    fn world() -> (Instance, DemandModel) {
        let inst = Instance::from_coordinates(
            vec![
                Facility {
                    id: 1,
                    x: 0.0,
                    y: 0.0,
                    open_cost: 300.0,
                    capacity: 15.0,
                },
                Facility {
                    id: 2,
                    x: 20.0,
                    y: 0.0,
                    open_cost: 250.0,
                    capacity: 12.0,
                },
                Facility {
                    id: 3,
                    x: 10.0,
                    y: 15.0,
                    open_cost: 280.0,
                    capacity: 18.0,
                },
            ],
            vec![
                Customer {
                    id: 1,
                    x: 2.0,
                    y: 1.0,
                    penalty: 60.0,
                    revenue: 30.0,
                },
                Customer {
                    id: 2,
                    x: 18.0,
                    y: 3.0,
                    penalty: 60.0,
                    revenue: 30.0,
                },
                Customer {
                    id: 3,
                    x: 9.0,
                    y: 12.0,
                    penalty: 60.0,
                    revenue: 30.0,
                },
            ],
            1.0,
        );
        let model = DemandModel::decision_independent(
            vec![10.0, 12.0, 9.0],
            vec![4.0, 5.0, 3.0],
            3,
            Support::grid(1.0, 30.0, 1.0).unwrap(),
        );
        (inst, model)
    }

    fn opts() -> CompareOptions {
        CompareOptions {
            methods: vec![Method::Sp(10), Method::Dr, Method::Dddr],
            test_scenarios: 50,
            plan: PlanOptions {
                solver: SolverChoice::Enumerate,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn without_dependency_dr_and_dddr_coincide() {
        let (inst, model) = world();
        let c = compare_methods(&inst, &model, &opts()).unwrap();
        let dr = c.outcome(Method::Dr).unwrap();
        let dddr = c.outcome(Method::Dddr).unwrap();
        assert_eq!(dr.plan.y, dddr.plan.y);
        assert_eq!(dr.report, dddr.report);
    }

    #[test]
    fn csv_groups_rows_by_statistic() {
        let (inst, model) = world();
        let c = compare_methods(&inst, &model, &opts()).unwrap();
        let csv = c.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "method,statistic,value");
        assert_eq!(lines.len(), 1 + 3 * statistic_names().len());
        assert!(lines[1].starts_with("sp10,mean_objective,"));
        assert!(lines[2].starts_with("dr,mean_objective,"));
        assert!(lines[3].starts_with("dddr,mean_objective,"));
        assert!(lines[4].starts_with("sp10,std_objective,"));
        assert!(!csv.contains('\r'));
        let table = c.to_table();
        assert_eq!(table.lines().next().unwrap().split_whitespace().count(), 4);
    }

    #[test]
    fn perturbed_needs_divisible_count() {
        let (_, model) = world();
        let mut o = opts();
        o.distribution = TestDistribution::Perturbed;
        o.perturbed_reps = 7;
        assert!(test_scenarios(&model, &LocationDecision::all_open(3), &o).is_err());
        o.perturbed_reps = 5;
        assert_eq!(
            test_scenarios(&model, &LocationDecision::all_open(3), &o)
                .unwrap()
                .len(),
            50
        );
    }
}
