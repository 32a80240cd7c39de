//! Problem data and the decision-dependent moment functions.
//!
//! Customer demand at site `j` has a mean and variance that react to the set of
//! open facilities:
//!
//! ```text
//! mu_j(y)      = bar_mu_j    * (1 + sum_i lambda_mu[j][i]    * y_i)
//! sigma_j^2(y) = bar_sigma_j^2 * (1 - sum_i lambda_sigma[j][i] * y_i)
//! ```
//!
//! Market-size caps on the mean and floors on the variance are not modelled;
//! [`validate`] rejects data whose variance could become non-positive.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance used by the invariant checks.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "f")]
    pub open_cost: f64,
    #[serde(rename = "C")]
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "p")]
    pub penalty: f64,
    #[serde(rename = "r")]
    pub revenue: f64,
}

/// Candidate facilities, customer sites and the unit transport costs between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub facilities: Vec<Facility>,
    pub customers: Vec<Customer>,
    /// `cost[i][j]`: unit cost of shipping from facility `i` to customer `j`.
    pub cost: Vec<Vec<f64>>,
}

impl Instance {
    /// Builds an instance whose transport costs are `multiplier` times the
    /// Euclidean distance between sites.
    pub fn from_coordinates(
        facilities: Vec<Facility>,
        customers: Vec<Customer>,
        multiplier: f64,
    ) -> Self {
        let cost = facilities
            .iter()
            .map(|f| {
                customers
                    .iter()
                    .map(|c| multiplier * (f.x - c.x).hypot(f.y - c.y))
                    .collect()
            })
            .collect();
        Instance {
            facilities,
            customers,
            cost,
        }
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i][j]
    }

    /// Returns a copy with every customer's unit penalty replaced.
    pub fn with_penalty(&self, penalty: f64) -> Instance {
        let mut out = self.clone();
        for c in &mut out.customers {
            c.penalty = penalty;
        }
        out
    }

    /// Total opening cost `f . y`.
    pub fn opening_cost(&self, y: &LocationDecision) -> f64 {
        self.facilities
            .iter()
            .zip(y.iter())
            .filter(|(_, open)| *open)
            .map(|(f, _)| f.open_cost)
            .sum()
    }
}

/// Arithmetic demand grid `min, min + step, ..., max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SupportSpec", into = "SupportSpec")]
pub struct Support {
    min: f64,
    max: f64,
    step: f64,
    points: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Support {
    pub fn grid(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "support grid needs finite bounds and positive step, got min={min} max={max} step={step}"
            )));
        }
        let span = (max - min) / step;
        let intervals = span.round();
        if (span - intervals).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "support span {} is not a multiple of step {step}",
                max - min
            )));
        }
        let k = intervals as usize + 1;
        if k < 2 {
            return Err(Error::InvalidParameter(
                "support needs at least two points".into(),
            ));
        }
        let points = (0..k).map(|n| min + step * n as f64).collect();
        Ok(Support {
            min,
            max,
            step,
            points,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self) -> SupportSpec {
        SupportSpec {
            min: self.min,
            max: self.max,
            step: self.step,
        }
    }
}

impl TryFrom<SupportSpec> for Support {
    type Error = Error;

    fn try_from(s: SupportSpec) -> Result<Self> {
        Support::grid(s.min, s.max, s.step)
    }
}

impl From<Support> for SupportSpec {
    fn from(s: Support) -> Self {
        s.spec()
    }
}

/// Empirical moments, dependency weights, finite support and ambiguity radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    pub bar_mu: Vec<f64>,
    pub bar_sigma: Vec<f64>,
    /// `lambda_mu[j][i]`: effect of opening facility `i` on the mean at customer `j`.
    pub lambda_mu: Vec<Vec<f64>>,
    pub lambda_sigma: Vec<Vec<f64>>,
    pub support: Support,
    pub eps_mu: Vec<f64>,
    #[serde(rename = "eps_lo")]
    pub eps_sigma_lo: Vec<f64>,
    #[serde(rename = "eps_hi")]
    pub eps_sigma_hi: Vec<f64>,
}

impl DemandModel {
    /// Model with no decision dependency and exact moment knowledge.
    pub fn decision_independent(
        bar_mu: Vec<f64>,
        bar_sigma: Vec<f64>,
        num_facilities: usize,
        support: Support,
    ) -> Self {
        let n = bar_mu.len();
        DemandModel {
            lambda_mu: vec![vec![0.0; num_facilities]; n],
            lambda_sigma: vec![vec![0.0; num_facilities]; n],
            eps_mu: vec![0.0; n],
            eps_sigma_lo: vec![1.0; n],
            eps_sigma_hi: vec![1.0; n],
            bar_mu,
            bar_sigma,
            support,
        }
    }

    pub fn num_customers(&self) -> usize {
        self.bar_mu.len()
    }

    /// Same model with every dependency weight zeroed.
    pub fn without_dependency(&self) -> DemandModel {
        let mut out = self.clone();
        for row in out.lambda_mu.iter_mut().chain(out.lambda_sigma.iter_mut()) {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        out
    }

    pub fn with_lambda(&self, lambda_mu: Vec<Vec<f64>>, lambda_sigma: Vec<Vec<f64>>) -> Self {
        DemandModel {
            lambda_mu,
            lambda_sigma,
            ..self.clone()
        }
    }

    fn check_customer(&self, j: usize) -> Result<()> {
        if j >= self.bar_mu.len() {
            Err(Error::UnknownCustomer(j))
        } else {
            Ok(())
        }
    }
}

/// Open/closed status of each candidate facility.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocationDecision(Vec<bool>);

impl LocationDecision {
    pub fn new(open: Vec<bool>) -> Self {
        LocationDecision(open)
    }

    pub fn closed(n: usize) -> Self {
        LocationDecision(vec![false; n])
    }

    pub fn all_open(n: usize) -> Self {
        LocationDecision(vec![true; n])
    }

    /// Decision whose bit `i` is the `i`-th most significant bit of `mask`
    /// over `n` positions, so counting `mask` upwards walks decisions in
    /// lexicographic order.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        LocationDecision((0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect())
    }

    /// Rounds a relaxed vector to the nearest binary decision.
    pub fn from_values(values: &[f64]) -> Self {
        LocationDecision(values.iter().map(|v| *v > 0.5).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn count_open(&self) -> usize {
        self.0.iter().filter(|v| **v).count()
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.0[i] {
            1.0
        } else {
            0.0
        }
    }

    /// Indices of open facilities, ascending.
    pub fn open_indices(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|i| self.0[*i]).collect()
    }
}

impl fmt::Display for LocationDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            f.write_str(if *v { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn check_decision(model: &DemandModel, y: &LocationDecision, j: usize) -> Result<()> {
    model.check_customer(j)?;
    if model.lambda_mu[j].len() != y.len() || model.lambda_sigma[j].len() != y.len() {
        return Err(Error::Dimension(format!(
            "decision has {} entries but customer {j} has {} dependency weights",
            y.len(),
            model.lambda_mu[j].len()
        )));
    }
    Ok(())
}

/// Decision-dependent mean `mu_j(y)`.
pub fn mean_of(model: &DemandModel, y: &LocationDecision, j: usize) -> Result<f64> {
    check_decision(model, y, j)?;
    let lift: f64 = model.lambda_mu[j]
        .iter()
        .enumerate()
        .map(|(i, l)| l * y.value(i))
        .sum();
    Ok(model.bar_mu[j] * (1.0 + lift))
}

/// Decision-dependent variance `sigma_j^2(y)`.
pub fn variance_of(model: &DemandModel, y: &LocationDecision, j: usize) -> Result<f64> {
    check_decision(model, y, j)?;
    let cut: f64 = model.lambda_sigma[j]
        .iter()
        .enumerate()
        .map(|(i, l)| l * y.value(i))
        .sum();
    Ok(model.bar_sigma[j].powi(2) * (1.0 - cut))
}

/// Bounds on the second moment `E[d_j^2]` admitted by the ambiguity set.
pub fn second_moment_window(
    model: &DemandModel,
    y: &LocationDecision,
    j: usize,
) -> Result<(f64, f64)> {
    let mu = mean_of(model, y, j)?;
    let raw = variance_of(model, y, j)? + mu * mu;
    Ok((raw * model.eps_sigma_lo[j], raw * model.eps_sigma_hi[j]))
}

/// Linear coefficient of `y_i` in `sigma_j^2(y) + mu_j(y)^2`.
pub fn big_lambda(model: &DemandModel, j: usize, i: usize) -> Result<f64> {
    model.check_customer(j)?;
    let lm = *model.lambda_mu[j].get(i).ok_or(Error::UnknownFacility(i))?;
    let ls = model.lambda_sigma[j][i];
    Ok(-model.bar_sigma[j].powi(2) * ls + model.bar_mu[j].powi(2) * (2.0 * lm + lm * lm))
}

/// Weight matrix `lambda[j][i] = exp(-c_ij / decay_scale)`, each row rescaled to
/// sum to `target_row_sum`. The same matrix is returned for mean and variance.
pub fn lambda_from_distance(
    instance: &Instance,
    decay_scale: f64,
    target_row_sum: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if !(target_row_sum > 0.0 && target_row_sum < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda row sum must lie in (0, 1), got {target_row_sum}"
        )));
    }
    if !(decay_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay scale must be positive, got {decay_scale}"
        )));
    }
    if instance.num_facilities() == 0 {
        return Err(Error::InvalidParameter("instance has no facilities".into()));
    }
    let lambda: Vec<Vec<f64>> = (0..instance.num_customers())
        .map(|j| {
            let raw: Vec<f64> = (0..instance.num_facilities())
                .map(|i| (-instance.c(i, j) / decay_scale).exp())
                .collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|r| target_row_sum * r / total).collect()
        })
        .collect();
    Ok((lambda.clone(), lambda))
}

/// Weight `1/rho` on each of the `rho` nearest facilities of every customer.
/// Distance ties go to the smaller facility index.
pub fn lambda_rho_means(instance: &Instance, rho: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = instance.num_facilities();
    if rho == 0 || rho > n {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in 1..={n}, got {rho}"
        )));
    }
    let weight = 1.0 / rho as f64;
    let lambda: Vec<Vec<f64>> = (0..instance.num_customers())
        .map(|j| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|a, b| {
                instance
                    .c(*a, j)
                    .total_cmp(&instance.c(*b, j))
                    .then(a.cmp(b))
            });
            let mut row = vec![0.0; n];
            for &i in &order[..rho] {
                row[i] = weight;
            }
            row
        })
        .collect();
    Ok((lambda.clone(), lambda))
}

/// Sets `eps_mu = kappa * bar_mu`, `eps_lo = 1 - kappa`, `eps_hi = 1 + kappa`.
pub fn apply_robustness_level(model: &DemandModel, kappa: f64) -> Result<DemandModel> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!(
            "robustness level must lie in [0, 1], got {kappa}"
        )));
    }
    let mut out = model.clone();
    out.eps_mu = model.bar_mu.iter().map(|m| kappa * m).collect();
    out.eps_sigma_lo = vec![1.0 - kappa; model.num_customers()];
    out.eps_sigma_hi = vec![1.0 + kappa; model.num_customers()];
    Ok(out)
}

/// One broken data invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

/// Checks every data invariant; an empty list means the pair is usable.
pub fn validate(instance: &Instance, model: &DemandModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |entity: String, rule: &str| {
        out.push(Violation {
            entity,
            rule: rule.to_string(),
        })
    };
    let ni = instance.num_facilities();
    let nj = instance.num_customers();

    if ni == 0 {
        push("instance".into(), "at least one facility required");
    }
    if nj == 0 {
        push("instance".into(), "at least one customer required");
    }
    for (i, f) in instance.facilities.iter().enumerate() {
        if !(f.capacity > 0.0 && f.capacity.is_finite()) {
            push(format!("facility {}", f.id), "capacity must be positive");
        }
        if !(f.open_cost >= 0.0 && f.open_cost.is_finite()) {
            push(
                format!("facility {}", f.id),
                "opening cost must be nonnegative",
            );
        }
        if instance.cost.get(i).map(|r| r.len()) != Some(nj) {
            push(
                format!("facility {}", f.id),
                "cost row length must equal customer count",
            );
        }
    }
    if instance.cost.len() != ni {
        push("cost".into(), "cost matrix must have one row per facility");
    }
    for (j, c) in instance.customers.iter().enumerate() {
        if !(c.revenue >= 0.0 && c.revenue.is_finite()) {
            push(format!("customer {}", c.id), "revenue must be nonnegative");
        }
        for i in 0..ni {
            let Some(cij) = instance.cost.get(i).and_then(|r| r.get(j)).copied() else {
                continue;
            };
            if !(cij >= 0.0 && cij.is_finite()) {
                push(
                    format!("cost[{}][{}]", instance.facilities[i].id, c.id),
                    "transport cost must be nonnegative",
                );
            }
            if !(c.penalty > cij) {
                push(
                    format!("customer {} / facility {}", c.id, instance.facilities[i].id),
                    "penalty not strictly greater than transport cost",
                );
            }
        }
    }

    let per_customer = [
        ("bar_mu", model.bar_mu.len()),
        ("bar_sigma", model.bar_sigma.len()),
        ("lambda_mu", model.lambda_mu.len()),
        ("lambda_sigma", model.lambda_sigma.len()),
        ("eps_mu", model.eps_mu.len()),
        ("eps_lo", model.eps_sigma_lo.len()),
        ("eps_hi", model.eps_sigma_hi.len()),
    ];
    let mut dims_ok = true;
    for (name, len) in per_customer {
        if len != nj {
            dims_ok = false;
            push(format!("demand.{name}"), "length must equal customer count");
        }
    }
    if !dims_ok {
        return out;
    }
    for j in 0..nj {
        let who = format!("customer {}", instance.customers[j].id);
        if !(model.bar_mu[j] >= 0.0 && model.bar_mu[j].is_finite()) {
            push(who.clone(), "empirical mean must be nonnegative");
        }
        if !(model.bar_sigma[j] >= 0.0 && model.bar_sigma[j].is_finite()) {
            push(who.clone(), "empirical std must be nonnegative");
        }
        for (name, row) in [
            ("lambda_mu", &model.lambda_mu[j]),
            ("lambda_sigma", &model.lambda_sigma[j]),
        ] {
            if row.len() != ni {
                push(
                    who.clone(),
                    &format!("{name} row length must equal facility count"),
                );
            } else if row.iter().any(|l| !(0.0..=1.0).contains(l)) {
                push(who.clone(), &format!("{name} entries must lie in [0, 1]"));
            }
        }
        if model.lambda_sigma[j].iter().sum::<f64>() >= 1.0 {
            push(who.clone(), "lambda_sigma row must sum to less than 1");
        }
        if !(model.eps_mu[j] >= 0.0) {
            push(who.clone(), "eps_mu must be nonnegative");
        }
        let (lo, hi) = (model.eps_sigma_lo[j], model.eps_sigma_hi[j]);
        if !((0.0..=1.0).contains(&lo) && 1.0 <= hi && hi.is_finite()) {
            push(
                who,
                "second-moment radii must satisfy 0 <= eps_lo <= 1 <= eps_hi",
            );
        }
    }
    let pts = model.support.points();
    if pts.len() < 2 || pts.windows(2).any(|w| w[1] <= w[0]) {
        push(
            "demand.support".into(),
            "support must be strictly increasing with K >= 2",
        );
    }
    out
}

/// Fails with [`Error::Validation`] if any invariant is broken.
pub fn ensure_valid(instance: &Instance, model: &DemandModel) -> Result<()> {
    let v = validate(instance, model);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

/// On-disk document: an instance together with its demand model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemData {
    #[serde(flatten)]
    pub instance: Instance,
    pub demand: DemandModel,
}

impl ProblemData {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
