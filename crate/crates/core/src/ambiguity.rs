//! Worst-case expected second-stage cost over the moment ambiguity set.
//!
//! For a fixed plan the set factorizes by customer. Customer `j` gets a small
//! LP over the support probabilities:
//!
//! ```text
//! max  sum_k pi_k h_j(y, d_k)
//! s.t. sum_k pi_k = 1
//!      mu - eps <= sum_k pi_k d_k <= mu + eps
//!      lo <= sum_k pi_k d_k^2 <= hi          (second_moment_window)
//!      pi >= 0
//! ```
//!
//! and its dual in `(alpha, delta1, delta2, gamma1, gamma2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner::cost_profile;
use crate::milp::ConstraintSense;
use crate::model::{mean_of, second_moment_window, DemandModel, Instance, LocationDecision};
use crate::solvers::simplex::{solve_lp, LpProblem, LpStatus, ObjSense, SimplexOptions};

/// Absolute slack tolerance for the ray inequalities.
pub const RAY_TOL: f64 = 1e-9;

/// Tolerance on the dual constraints when a certificate is checked.
pub const CERT_TOL: f64 = 1e-7;

/// Mean and second-moment window of one customer under a fixed plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentWindow {
    pub mean: f64,
    pub eps_mu: f64,
    pub second_lo: f64,
    pub second_hi: f64,
}

impl MomentWindow {
    pub fn of(model: &DemandModel, y: &LocationDecision, j: usize) -> Result<Self> {
        let (second_lo, second_hi) = second_moment_window(model, y, j)?;
        Ok(MomentWindow {
            mean: mean_of(model, y, j)?,
            eps_mu: model.eps_mu[j],
            second_lo,
            second_hi,
        })
    }
}

/// Dual multipliers per customer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCertificate {
    pub alpha: Vec<f64>,
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
}

impl DualCertificate {
    pub fn zeros(n: usize) -> Self {
        DualCertificate {
            alpha: vec![0.0; n],
            delta1: vec![0.0; n],
            delta2: vec![0.0; n],
            gamma1: vec![0.0; n],
            gamma2: vec![0.0; n],
        }
    }

    fn push(&mut self, d: CustomerDual) {
        self.alpha.push(d.alpha);
        self.delta1.push(d.delta1);
        self.delta2.push(d.delta2);
        self.gamma1.push(d.gamma1);
        self.gamma2.push(d.gamma2);
    }

    pub fn customer(&self, j: usize) -> CustomerDual {
        CustomerDual {
            alpha: self.alpha[j],
            delta1: self.delta1[j],
            delta2: self.delta2[j],
            gamma1: self.gamma1[j],
            gamma2: self.gamma2[j],
        }
    }
}

/// Dual point (or ray) of one customer's problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CustomerDual {
    pub alpha: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl CustomerDual {
    /// `alpha + (delta1 - delta2) d + (gamma1 - gamma2) d^2`
    pub fn lhs(&self, d: f64) -> f64 {
        self.alpha + (self.delta1 - self.delta2) * d + (self.gamma1 - self.gamma2) * d * d
    }

    /// Dual objective at a moment window.
    pub fn objective(&self, w: &MomentWindow) -> f64 {
        self.alpha + self.delta1 * (w.mean + w.eps_mu) - self.delta2 * (w.mean - w.eps_mu)
            + self.gamma1 * w.second_hi
            - self.gamma2 * w.second_lo
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.alpha,
            self.delta1,
            self.delta2,
            self.gamma1,
            self.gamma2,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseDistribution {
    /// `pi[j][k]`
    pub pi: Vec<Vec<f64>>,
    /// Worst-case expected second-stage cost summed over customers.
    pub value: f64,
    pub per_customer: Vec<f64>,
    /// Multipliers read off the primal solves.
    pub certificate: DualCertificate,
}

/// Solves one customer's primal LP given `h` at each support point.
pub fn worst_case_customer(
    points: &[f64],
    h: &[f64],
    w: &MomentWindow,
) -> Result<Option<(f64, Vec<f64>, CustomerDual)>> {
    let k = points.len();
    let mut lp = LpProblem::new(ObjSense::Maximize, k);
    lp.objective = h.to_vec();
    let lin: Vec<(usize, f64)> = points.iter().copied().enumerate().collect();
    let sq: Vec<(usize, f64)> = points.iter().map(|d| d * d).enumerate().collect();
    lp.add_row((0..k).map(|i| (i, 1.0)).collect(), ConstraintSense::Eq, 1.0);
    lp.add_row(lin.clone(), ConstraintSense::Le, w.mean + w.eps_mu);
    lp.add_row(lin, ConstraintSense::Ge, w.mean - w.eps_mu);
    lp.add_row(sq.clone(), ConstraintSense::Le, w.second_hi);
    lp.add_row(sq, ConstraintSense::Ge, w.second_lo);
    let s = solve_lp(&lp, &SimplexOptions::default())?;
    match s.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::LpUnbounded),
        LpStatus::Optimal => {
            let y = &s.duals;
            let dual = CustomerDual {
                alpha: y[0],
                delta1: y[1].max(0.0),
                delta2: (-y[2]).max(0.0),
                gamma1: y[3].max(0.0),
                gamma2: (-y[4]).max(0.0),
            };
            Ok(Some((s.objective, s.x, dual)))
        }
    }
}

/// Solves one customer's dual LP directly.
pub fn dual_customer(
    points: &[f64],
    h: &[f64],
    w: &MomentWindow,
) -> Result<Option<(f64, CustomerDual)>> {
    // variables: alpha (free), delta1, delta2, gamma1, gamma2
    let mut lp = LpProblem::new(ObjSense::Minimize, 5);
    lp.lower[0] = f64::NEG_INFINITY;
    lp.objective = vec![
        1.0,
        w.mean + w.eps_mu,
        -(w.mean - w.eps_mu),
        w.second_hi,
        -w.second_lo,
    ];
    for (d, hk) in points.iter().zip(h) {
        lp.add_row(
            vec![(0, 1.0), (1, *d), (2, -d), (3, d * d), (4, -d * d)],
            ConstraintSense::Ge,
            *hk,
        );
    }
    let s = solve_lp(&lp, &SimplexOptions::default())?;
    match s.status {
        LpStatus::Optimal => Ok(Some((
            s.objective,
            CustomerDual {
                alpha: s.x[0],
                delta1: s.x[1],
                delta2: s.x[2],
                gamma1: s.x[3],
                gamma2: s.x[4],
            },
        ))),
        // an unbounded dual means the primal window is empty
        LpStatus::Unbounded => Ok(None),
        LpStatus::Infeasible => Err(Error::LpInfeasible),
    }
}

fn infeasible(instance: &Instance, model: &DemandModel, y: &LocationDecision, j: usize) -> Error {
    let violated = ambiguity_feasible(instance, model, y)
        .map(|r| {
            r.violations
                .into_iter()
                .filter(|v| v.customer == j)
                .collect()
        })
        .unwrap_or_default();
    Error::AmbiguityInfeasible {
        customer: j,
        violated,
    }
}

/// `max_{pi in U(y)} E[h(y, d)]`, one LP per customer.
pub fn worst_case_expectation(
    instance: &Instance,
    model: &DemandModel,
    y: &LocationDecision,
) -> Result<(f64, WorstCaseDistribution)> {
    let points = model.support.points();
    let nj = instance.num_customers();
    let mut pi = Vec::with_capacity(nj);
    let mut per_customer = Vec::with_capacity(nj);
    let mut certificate = DualCertificate::zeros(0);
    for j in 0..nj {
        let h = cost_profile(instance, y, j, points)?;
        let w = MomentWindow::of(model, y, j)?;
        let Some((v, p, dual)) = worst_case_customer(points, &h, &w)? else {
            return Err(infeasible(instance, model, y, j));
        };
        pi.push(p);
        per_customer.push(v);
        certificate.push(dual);
    }
    let value = per_customer.iter().sum();
    Ok((
        value,
        WorstCaseDistribution {
            pi,
            value,
            per_customer,
            certificate,
        },
    ))
}

/// Same quantity obtained from the dual LPs.
pub fn dual_lp(
    instance: &Instance,
    model: &DemandModel,
    y: &LocationDecision,
) -> Result<(f64, DualCertificate)> {
    let points = model.support.points();
    let mut cert = DualCertificate::zeros(0);
    let mut total = 0.0;
    for j in 0..instance.num_customers() {
        let h = cost_profile(instance, y, j, points)?;
        let w = MomentWindow::of(model, y, j)?;
        let Some((v, dual)) = dual_customer(points, &h, &w)? else {
            return Err(infeasible(instance, model, y, j));
        };
        total += v;
        cert.push(dual);
    }
    Ok((total, cert))
}

/// Evaluates the dual objective after checking sign and covering constraints.
pub fn dual_value(
    instance: &Instance,
    model: &DemandModel,
    y: &LocationDecision,
    cert: &DualCertificate,
) -> Result<f64> {
    let nj = instance.num_customers();
    if cert.alpha.len() != nj {
        return Err(Error::Dimension(format!(
            "certificate covers {} customers, instance has {nj}",
            cert.alpha.len()
        )));
    }
    let points = model.support.points();
    let mut total = 0.0;
    for j in 0..nj {
        let c = cert.customer(j);
        if [c.delta1, c.delta2, c.gamma1, c.gamma2]
            .iter()
            .any(|v| *v < 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "certificate for customer {j} has a negative multiplier"
            )));
        }
        let h = cost_profile(instance, y, j, points)?;
        for (k, (d, hk)) in points.iter().zip(&h).enumerate() {
            let gap = c.lhs(*d) - hk;
            if gap < -CERT_TOL * (1.0 + hk.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "certificate for customer {j} violates the covering constraint at support point {k} by {:.3e}",
                    -gap
                )));
            }
        }
        total += c.objective(&MomentWindow::of(model, y, j)?);
    }
    Ok(total)
}

/// The three extreme rays of the cone `{alpha + (d1 - d2) d_k + (g1 - g2) d_k^2 >= 0}`
/// built from the smallest two, largest two, and extreme support points.
pub fn extreme_rays(points: &[f64]) -> Result<[CustomerDual; 3]> {
    let k = points.len();
    if k < 2 || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "support must be strictly increasing with at least two points".into(),
        ));
    }
    let (d1, d2, dk1, dk) = (points[0], points[1], points[k - 2], points[k - 1]);
    Ok([
        CustomerDual {
            alpha: d1 * d2,
            delta1: 0.0,
            delta2: d1 + d2,
            gamma1: 1.0,
            gamma2: 0.0,
        },
        CustomerDual {
            alpha: dk1 * dk,
            delta1: 0.0,
            delta2: dk1 + dk,
            gamma1: 1.0,
            gamma2: 0.0,
        },
        CustomerDual {
            alpha: -d1 * dk,
            delta1: d1 + dk,
            delta2: 0.0,
            gamma1: 0.0,
            gamma2: 1.0,
        },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaySlack {
    pub customer: usize,
    /// 0-based index into [`extreme_rays`].
    pub ray: usize,
    pub slack: f64,
}

/// Every extreme ray of the dual cone: the lower chords between neighbouring
/// support points, the chord through the end points, the range of `d` and of
/// `d^2` over the support, and the two window-width directions. A window is
/// nonempty exactly when none of them has a negative objective.
pub fn hull_facets(points: &[f64]) -> Result<Vec<CustomerDual>> {
    let [_, _, upper] = extreme_rays(points)?;
    let k = points.len();
    let ray = |alpha, delta1, delta2, gamma1, gamma2| CustomerDual {
        alpha,
        delta1,
        delta2,
        gamma1,
        gamma2,
    };
    let mut out: Vec<CustomerDual> = points
        .windows(2)
        .map(|w| ray(w[0] * w[1], 0.0, w[0] + w[1], 1.0, 0.0))
        .collect();
    out.push(upper);
    let sq_min = points.iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
    let sq_max = points.iter().map(|d| d * d).fold(0.0, f64::max);
    out.extend([
        ray(-points[0], 1.0, 0.0, 0.0, 0.0),
        ray(points[k - 1], 0.0, 1.0, 0.0, 0.0),
        ray(-sq_min, 0.0, 0.0, 1.0, 0.0),
        ray(sq_max, 0.0, 0.0, 0.0, 1.0),
        ray(0.0, 1.0, 1.0, 0.0, 0.0),
        ray(0.0, 0.0, 0.0, 1.0, 1.0),
    ]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// No inequality of [`hull_facets`] fails for any customer.
    pub feasible: bool,
    /// Rays of [`extreme_rays`] whose inequality fails, in customer then ray order.
    pub violations: Vec<RaySlack>,
    /// Every (customer, ray) slack of the three rays.
    pub slacks: Vec<RaySlack>,
    /// Failing inequalities of [`hull_facets`]; `ray` indexes that list.
    pub facet_violations: Vec<RaySlack>,
}

/// Checks the three ray inequalities at every customer's moment window, then
/// the remaining hull facets, which the three rays alone do not cover.
pub fn ambiguity_feasible(
    instance: &Instance,
    model: &DemandModel,
    y: &LocationDecision,
) -> Result<FeasibilityReport> {
    let points = model.support.points();
    let rays = extreme_rays(points)?;
    let facets = hull_facets(points)?;
    let mut slacks = Vec::new();
    let mut facet_violations = Vec::new();
    for j in 0..instance.num_customers() {
        let w = MomentWindow::of(model, y, j)?;
        for (r, ray) in rays.iter().enumerate() {
            slacks.push(RaySlack {
                customer: j,
                ray: r,
                slack: ray.objective(&w),
            });
        }
        for (r, f) in facets.iter().enumerate() {
            let slack = f.objective(&w);
            if slack < -RAY_TOL * (1.0 + w.second_hi.abs()) {
                facet_violations.push(RaySlack {
                    customer: j,
                    ray: r,
                    slack,
                });
            }
        }
    }
    let violations: Vec<RaySlack> = slacks
        .iter()
        .copied()
        .filter(|s| s.slack < -RAY_TOL)
        .collect();
    Ok(FeasibilityReport {
        feasible: violations.is_empty() && facet_violations.is_empty(),
        violations,
        slacks,
        facet_violations,
    })
}

/// Exact nonemptiness of one customer's window via phase-one simplex.
pub fn window_nonempty(points: &[f64], w: &MomentWindow) -> Result<bool> {
    let zeros = vec![0.0; points.len()];
    Ok(worst_case_customer(points, &zeros, w)?.is_some())
}

/// Exact per-customer nonemptiness of `U(y)`.
pub fn ambiguity_feasible_lp(
    instance: &Instance,
    model: &DemandModel,
    y: &LocationDecision,
) -> Result<Vec<bool>> {
    (0..instance.num_customers())
        .map(|j| window_nonempty(model.support.points(), &MomentWindow::of(model, y, j)?))
        .collect()
}
