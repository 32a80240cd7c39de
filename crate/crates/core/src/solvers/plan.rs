//! Training a location plan with one of the supported methods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bnb::{branch_and_bound, BnbOptions, MipStatus};
use super::enumerate::{enumerate_oracle, enumerate_sp};
use crate::benchmarks::gen_training;
use crate::error::{Error, Result};
use crate::milp::{build_dddr, build_dr, build_sp_saa, DualBounds, Formulation};
use crate::model::{DemandModel, Instance, LocationDecision};

/// Planning approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    /// Sample average over `n` training scenarios.
    Sp(usize),
    /// Robust with the decision dependency dropped.
    Dr,
    Dddr,
}

impl Method {
    /// Column label used in reports.
    pub fn label(&self) -> String {
        match self {
            Method::Sp(n) => format!("SP({n})"),
            Method::Dr => "DR".into(),
            Method::Dddr => "DDDR".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Sp(n) => write!(f, "sp{n}"),
            Method::Dr => f.write_str("dr"),
            Method::Dddr => f.write_str("dddr"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "dr" => Ok(Method::Dr),
            "dddr" => Ok(Method::Dddr),
            _ => t
                .strip_prefix("sp")
                .map(|n| n.trim_start_matches(['(', ':']).trim_end_matches(')'))
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| *n > 0)
                .map(Method::Sp)
                .ok_or_else(|| {
                    Error::Config(format!("unknown method {s:?} (expected spN, dr, dddr)"))
                }),
        }
    }
}

impl TryFrom<String> for Method {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

/// How the plan is searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Branch and bound on the mixed-integer model.
    Milp,
    /// Scan every plan (at most 20 facilities).
    Enumerate,
}

/// Source of the dual multiplier bounds in the robust models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsRecipe {
    /// Instance-derived bounds that keep the model exact.
    Certified,
    /// The flat value 100; doubled while any multiplier sits at its bound.
    Default,
    /// A flat value; doubled while any multiplier sits at its bound.
    Uniform(f64),
}

impl BoundsRecipe {
    pub fn resolve(&self, instance: &Instance, model: &DemandModel) -> Result<DualBounds> {
        let nj = instance.num_customers();
        match *self {
            BoundsRecipe::Certified => DualBounds::certified(instance, model),
            BoundsRecipe::Default => Ok(DualBounds::flat_default(nj)),
            BoundsRecipe::Uniform(v) => Ok(DualBounds::uniform(nj, v)),
        }
    }

    fn is_flat(&self) -> bool {
        !matches!(self, BoundsRecipe::Certified)
    }
}

/// `certified`, `default`, or a positive number for a flat bound.
impl FromStr for BoundsRecipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "certified" => Ok(BoundsRecipe::Certified),
            "default" => Ok(BoundsRecipe::Default),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(BoundsRecipe::Uniform)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "dual bounds {s:?}: expected certified, default or a positive number"
                    ))
                }),
        }
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "milp" => Ok(SolverChoice::Milp),
            "enumerate" => Ok(SolverChoice::Enumerate),
            _ => Err(Error::Config(format!(
                "unknown solver {s:?} (expected milp or enumerate)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanOptions {
    pub solver: SolverChoice,
    pub budget: Option<usize>,
    pub bounds: BoundsRecipe,
    pub cuts: bool,
    pub training_seed: u64,
    /// Doublings allowed when flat bounds bind.
    pub max_retries: usize,
    pub bnb: BnbOptions,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            solver: SolverChoice::Milp,
            budget: None,
            bounds: BoundsRecipe::Certified,
            cuts: true,
            training_seed: 0,
            max_retries: 6,
            bnb: BnbOptions::default(),
        }
    }
}

/// A trained plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub method: Method,
    pub y: LocationDecision,
    /// Facility ids of the open facilities, ascending.
    pub open_facilities: Vec<usize>,
    /// Optimal value of the training model.
    pub objective: f64,
    pub solver: SolverChoice,
    /// B&B nodes or plans scanned.
    pub work: usize,
    pub bound_doublings: usize,
    /// Multipliers left at their bound in the final solve.
    pub binding_duals: Vec<String>,
}

impl Plan {
    fn new(
        instance: &Instance,
        method: Method,
        y: LocationDecision,
        objective: f64,
        solver: SolverChoice,
        work: usize,
    ) -> Self {
        let mut open_facilities: Vec<usize> = y
            .open_indices()
            .into_iter()
            .map(|i| instance.facilities[i].id)
            .collect();
        open_facilities.sort_unstable();
        Plan {
            method,
            y,
            open_facilities,
            objective,
            solver,
            work,
            bound_doublings: 0,
            binding_duals: Vec::new(),
        }
    }
}

fn solve_formulation(
    f: &Formulation,
    opts: &BnbOptions,
) -> Result<(LocationDecision, f64, usize, Vec<String>)> {
    let s = branch_and_bound(&f.model, opts)?;
    match s.status {
        MipStatus::Optimal => Ok((
            f.decision(&s.values),
            s.objective,
            s.nodes,
            f.binding_duals(&s.values),
        )),
        MipStatus::Infeasible => Err(Error::LpInfeasible),
        MipStatus::NodeLimit => Err(Error::Backend(format!(
            "node limit reached after {} nodes",
            s.nodes
        ))),
    }
}

fn robust_milp(
    instance: &Instance,
    model: &DemandModel,
    method: Method,
    opts: &PlanOptions,
) -> Result<Plan> {
    let mut bounds = opts.bounds.resolve(instance, model)?;
    let flat = opts.bounds.is_flat();
    let mut doublings = 0;
    loop {
        let f = if method == Method::Dr {
            build_dr(instance, model, &bounds, opts.budget)?
        } else {
            build_dddr(instance, model, &bounds, opts.budget, opts.cuts)?
        };
        let (y, obj, nodes, binding) = solve_formulation(&f, &opts.bnb)?;
        if binding.is_empty() || !flat || doublings >= opts.max_retries {
            if !binding.is_empty() {
                log::warn!(
                    "{method}: {} dual multipliers at their bounds",
                    binding.len()
                );
            }
            let mut p = Plan::new(instance, method, y, obj, SolverChoice::Milp, nodes);
            p.bound_doublings = doublings;
            p.binding_duals = binding;
            return Ok(p);
        }
        log::info!("{method}: doubling dual bounds ({} binding)", binding.len());
        bounds = bounds.doubled();
        doublings += 1;
    }
}

/// The training model of `method` without solving it. SP draws its
/// training scenarios from `opts.training_seed`.
pub fn build_formulation(
    instance: &Instance,
    model: &DemandModel,
    method: Method,
    opts: &PlanOptions,
) -> Result<Formulation> {
    match method {
        Method::Sp(n) => {
            let train = gen_training(model, n, opts.training_seed)?;
            build_sp_saa(instance, &train, opts.budget)
        }
        Method::Dr => build_dr(
            instance,
            model,
            &opts.bounds.resolve(instance, model)?,
            opts.budget,
        ),
        Method::Dddr => build_dddr(
            instance,
            model,
            &opts.bounds.resolve(instance, model)?,
            opts.budget,
            opts.cuts,
        ),
    }
}

/// Trains `method` on `(instance, model)`.
pub fn solve_plan(
    instance: &Instance,
    model: &DemandModel,
    method: Method,
    opts: &PlanOptions,
) -> Result<Plan> {
    match (method, opts.solver) {
        (Method::Sp(n), solver) => {
            let train = gen_training(model, n, opts.training_seed)?;
            match solver {
                SolverChoice::Enumerate => {
                    let e = enumerate_sp(instance, &train, opts.budget)?;
                    Ok(Plan::new(
                        instance,
                        method,
                        e.y,
                        e.objective,
                        solver,
                        e.evaluated,
                    ))
                }
                SolverChoice::Milp => {
                    let f = build_sp_saa(instance, &train, opts.budget)?;
                    let (y, obj, nodes, _) = solve_formulation(&f, &opts.bnb)?;
                    Ok(Plan::new(instance, method, y, obj, solver, nodes))
                }
            }
        }
        (Method::Dr, SolverChoice::Enumerate) => {
            let e = enumerate_oracle(instance, &model.without_dependency(), opts.budget)?;
            Ok(Plan::new(
                instance,
                method,
                e.y,
                e.objective,
                SolverChoice::Enumerate,
                e.evaluated,
            ))
        }
        (Method::Dddr, SolverChoice::Enumerate) => {
            let e = enumerate_oracle(instance, model, opts.budget)?;
            Ok(Plan::new(
                instance,
                method,
                e.y,
                e.objective,
                SolverChoice::Enumerate,
                e.evaluated,
            ))
        }
        (_, SolverChoice::Milp) => robust_milp(instance, model, method, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Sp(20), Method::Sp(100), Method::Dr, Method::Dddr] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!("SP(20)".parse::<Method>().unwrap(), Method::Sp(20));
        assert_eq!("sp:5".parse::<Method>().unwrap(), Method::Sp(5));
        assert!("sp0".parse::<Method>().is_err());
        assert!("milp".parse::<Method>().is_err());
        assert_eq!(Method::Sp(20).label(), "SP(20)");
    }

    #[test]
    fn bounds_recipe_serde() {
        let v: BoundsRecipe = serde_json::from_str("\"certified\"").unwrap();
        assert_eq!(v, BoundsRecipe::Certified);
        let v: BoundsRecipe = serde_json::from_str("{\"uniform\": 50.0}").unwrap();
        assert_eq!(v, BoundsRecipe::Uniform(50.0));
        assert_eq!(
            "certified".parse::<BoundsRecipe>().unwrap(),
            BoundsRecipe::Certified
        );
        assert_eq!(
            "Default".parse::<BoundsRecipe>().unwrap(),
            BoundsRecipe::Default
        );
        assert_eq!(
            "250".parse::<BoundsRecipe>().unwrap(),
            BoundsRecipe::Uniform(250.0)
        );
        assert!("-1".parse::<BoundsRecipe>().is_err());
        assert_eq!(
            "enumerate".parse::<SolverChoice>().unwrap(),
            SolverChoice::Enumerate
        );
    }
}
