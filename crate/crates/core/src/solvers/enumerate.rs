//! Exhaustive search over location plans.

use rayon::prelude::*;

use crate::ambiguity::worst_case_expectation;
use crate::benchmarks::ScenarioSet;
use crate::error::{Error, Result};
use crate::inner::h_closed_form;
use crate::model::{DemandModel, Instance, LocationDecision};

/// Largest facility count the enumerators accept.
pub const MAX_ENUMERATE: usize = 20;

/// Winner of an exhaustive scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumerated {
    pub y: LocationDecision,
    pub objective: f64,
    /// Plans evaluated (inside the budget).
    pub evaluated: usize,
    /// Plans skipped because their ambiguity set is empty.
    pub infeasible: usize,
}

fn plans(n: usize, budget: Option<usize>) -> Result<Vec<LocationDecision>> {
    if n > MAX_ENUMERATE {
        return Err(Error::TooManyFacilities(n));
    }
    Ok((0..1u64 << n)
        .map(|m| LocationDecision::from_mask(m, n))
        .filter(|y| budget.is_none_or(|b| y.count_open() <= b))
        .collect())
}

/// Lexicographically first plan among those within `1e-9` relative of the minimum.
fn pick(scored: Vec<(LocationDecision, Option<f64>)>) -> Result<Enumerated> {
    let evaluated = scored.len();
    let infeasible = scored.iter().filter(|(_, v)| v.is_none()).count();
    let best = scored
        .iter()
        .filter_map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::LpInfeasible);
    }
    let tol = 1e-9 * (1.0 + best.abs());
    let (y, objective) = scored
        .into_iter()
        .filter_map(|(y, v)| v.map(|v| (y, v)))
        .find(|(_, v)| *v <= best + tol)
        .expect("minimum attained");
    Ok(Enumerated {
        y,
        objective,
        evaluated,
        infeasible,
    })
}

/// `min_y f.y + max_{pi in U(y)} E[h(y, d)]` by scanning every plan.
/// Plans whose ambiguity set is empty are skipped.
pub fn enumerate_oracle(
    instance: &Instance,
    model: &DemandModel,
    budget: Option<usize>,
) -> Result<Enumerated> {
    let scored = plans(instance.num_facilities(), budget)?
        .into_par_iter()
        .map(|y| match worst_case_expectation(instance, model, &y) {
            Ok((v, _)) => {
                let total = instance.opening_cost(&y) + v;
                Ok((y, Some(total)))
            }
            Err(Error::AmbiguityInfeasible { .. }) => Ok((y, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    pick(scored)
}

/// `min_y f.y + sum_w p_w h(y, d_w)` by scanning every plan.
pub fn enumerate_sp(
    instance: &Instance,
    scenarios: &ScenarioSet,
    budget: Option<usize>,
) -> Result<Enumerated> {
    if scenarios.num_customers() != instance.num_customers() {
        return Err(Error::Dimension(format!(
            "scenarios cover {} customers, instance has {}",
            scenarios.num_customers(),
            instance.num_customers()
        )));
    }
    let scored = plans(instance.num_facilities(), budget)?
        .into_par_iter()
        .map(|y| {
            let mut v = instance.opening_cost(&y);
            for (d, p) in scenarios.demands.iter().zip(&scenarios.probabilities) {
                v += p * h_closed_form(instance, &y, d).expect("dimensions checked");
            }
            (y, Some(v))
        })
        .collect();
    pick(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Customer, Facility, Support};

    fn one_facility(open_cost: f64) -> (Instance, DemandModel) {
        let inst = Instance {
            facilities: vec![Facility {
                id: 1,
                x: 0.0,
                y: 0.0,
                open_cost,
                capacity: 20.0,
            }],
            customers: vec![Customer {
                id: 1,
                x: 0.0,
                y: 0.0,
                penalty: 10.0,
                revenue: 4.0,
            }],
            cost: vec![vec![1.0]],
        };
        let model = DemandModel::decision_independent(
            vec![10.0],
            vec![2.0],
            1,
            Support::grid(5.0, 15.0, 1.0).unwrap(),
        );
        (inst, model)
    }

    #[test]
    fn single_facility_compares_two_plans() {
        let (inst, model) = one_facility(5.0);
        let e = enumerate_oracle(&inst, &model, None).unwrap();
        assert_eq!(e.evaluated, 2);
        assert!(e.y.is_open(0));
        let (closed, _) =
            worst_case_expectation(&inst, &model, &LocationDecision::closed(1)).unwrap();
        let (open, _) =
            worst_case_expectation(&inst, &model, &LocationDecision::all_open(1)).unwrap();
        assert!((e.objective - (5.0 + open).min(closed)).abs() < 1e-9);

        let (inst, model) = one_facility(1e6);
        assert!(!enumerate_oracle(&inst, &model, None).unwrap().y.is_open(0));
    }

    #[test]
    fn zero_budget_forces_closed_plan() {
        let (inst, model) = one_facility(5.0);
        let e = enumerate_oracle(&inst, &model, Some(0)).unwrap();
        assert_eq!(e.evaluated, 1);
        assert_eq!(e.y, LocationDecision::closed(1));
    }

    #[test]
    fn ties_go_to_the_first_plan() {
        let inst = Instance {
            facilities: (1..=2)
                .map(|id| Facility {
                    id,
                    x: 0.0,
                    y: 0.0,
                    open_cost: 0.0,
                    capacity: 0.0,
                })
                .collect(),
            customers: vec![Customer {
                id: 1,
                x: 0.0,
                y: 0.0,
                penalty: 3.0,
                revenue: 1.0,
            }],
            cost: vec![vec![1.0], vec![1.0]],
        };
        let s = ScenarioSet::uniform(vec![vec![4.0]], 0, "t").unwrap();
        let e = enumerate_sp(&inst, &s, None).unwrap();
        assert_eq!(e.y, LocationDecision::closed(2));
        assert!((e.objective - 8.0).abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let inst = Instance {
            facilities: (1..=21)
                .map(|id| Facility {
                    id,
                    x: 0.0,
                    y: 0.0,
                    open_cost: 1.0,
                    capacity: 1.0,
                })
                .collect(),
            customers: vec![],
            cost: vec![vec![]; 21],
        };
        let s = ScenarioSet::uniform(vec![vec![]], 0, "t").unwrap();
        assert!(matches!(
            enumerate_sp(&inst, &s, None),
            Err(Error::TooManyFacilities(21))
        ));
    }
}
