//! Mixed-integer reformulation of the decision-dependent robust problem.
//!
//! Per customer the inner worst case is replaced by its dual, whose objective
//! multiplies the duals `delta`, `gamma` by the decision-dependent moments.
//! Expanding `mu_j(y)` and `sigma_j^2(y) + mu_j(y)^2` in `y` leaves products
//!
//! ```text
//! Delta^h_ji = delta^h_j y_i,  Gamma^h_ji = gamma^h_j y_i,  Psi^h_jlm = gamma^h_j y_l y_m  (l > m)
//! ```
//!
//! which are replaced by McCormick envelopes. Products whose objective
//! coefficient is zero are never created.

use serde::Serialize;

use super::mccormick::{mccormick_bilinear, mccormick_trilinear};
use super::{ConstraintSense, MilpModel, VarId};
use crate::ambiguity::extreme_rays;
use crate::error::{Error, Result};
use crate::inner::theta_affine;
use crate::model::{big_lambda, ensure_valid, DemandModel, Instance, LocationDecision};

/// Upper bounds on the dual multipliers, per customer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualBounds {
    pub ub_delta1: Vec<f64>,
    pub ub_delta2: Vec<f64>,
    pub ub_gamma1: Vec<f64>,
    pub ub_gamma2: Vec<f64>,
}

impl DualBounds {
    /// Default value used for every multiplier.
    pub const DEFAULT: f64 = 100.0;

    pub fn uniform(customers: usize, value: f64) -> Self {
        DualBounds {
            ub_delta1: vec![value; customers],
            ub_delta2: vec![value; customers],
            ub_gamma1: vec![value; customers],
            ub_gamma2: vec![value; customers],
        }
    }

    pub fn flat_default(customers: usize) -> Self {
        Self::uniform(customers, Self::DEFAULT)
    }

    /// Bounds large enough to contain a vertex of every customer's dual
    /// feasible region, so some optimal dual of every plan satisfies them and
    /// the reformulation stays exact.
    ///
    /// A vertex is pinned by at most three active covering rows. With `R` the
    /// spread of slopes of `h_j` in `d`, `L` the largest absolute slope and
    /// `h` the smallest support gap, interpolation gives
    /// `|gamma| <= max(R / 2h, L / (d_1 + d_2))` and
    /// `|delta| <= L + |gamma| (d_{K-1} + d_K)`. Needs `K >= 3` and `d_1 + d_2 > 0`.
    pub fn certified(instance: &Instance, model: &DemandModel) -> Result<Self> {
        let pts = model.support.points();
        let k = pts.len();
        if k < 3 || pts[0] + pts[1] <= 0.0 {
            return Err(Error::InvalidParameter(
                "certified dual bounds need at least three support points with d_1 + d_2 > 0"
                    .into(),
            ));
        }
        let gap = pts
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let top = pts[k - 2] + pts[k - 1];
        let nj = instance.num_customers();
        let mut out = Self::uniform(nj, 0.0);
        for j in 0..nj {
            let cu = &instance.customers[j];
            let cmin = (0..instance.num_facilities())
                .map(|i| instance.c(i, j))
                .fold(cu.penalty, f64::min);
            let spread = cu.penalty - cmin;
            let steep = (0..instance.num_facilities())
                .map(|i| (instance.c(i, j) - cu.revenue).abs())
                .fold((cu.penalty - cu.revenue).abs(), f64::max);
            let g = (spread / (2.0 * gap)).max(steep / (pts[0] + pts[1]));
            let d = steep + g * top;
            let pad = |v: f64| v * (1.0 + 1e-6) + 1e-6;
            out.ub_gamma1[j] = pad(g);
            out.ub_gamma2[j] = pad(g);
            out.ub_delta1[j] = pad(d);
            out.ub_delta2[j] = pad(d);
        }
        Ok(out)
    }

    pub fn doubled(&self) -> Self {
        let dbl = |v: &Vec<f64>| v.iter().map(|x| 2.0 * x).collect();
        DualBounds {
            ub_delta1: dbl(&self.ub_delta1),
            ub_delta2: dbl(&self.ub_delta2),
            ub_gamma1: dbl(&self.ub_gamma1),
            ub_gamma2: dbl(&self.ub_gamma2),
        }
    }

    fn check(&self, customers: usize) -> Result<()> {
        for (name, v) in [
            ("delta1", &self.ub_delta1),
            ("delta2", &self.ub_delta2),
            ("gamma1", &self.ub_gamma1),
            ("gamma2", &self.ub_gamma2),
        ] {
            if v.len() != customers {
                return Err(Error::Dimension(format!(
                    "{name} bounds cover {} customers, instance has {customers}",
                    v.len()
                )));
            }
            if v.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} bounds must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}

/// Dual variable handles per customer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualLayout {
    pub alpha: Vec<VarId>,
    pub delta1: Vec<VarId>,
    pub delta2: Vec<VarId>,
    pub gamma1: Vec<VarId>,
    pub gamma2: Vec<VarId>,
}

/// A built model together with the handles needed to read a solution.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub model: MilpModel,
    /// Location binaries in facility order.
    pub y: Vec<VarId>,
    /// Present for the robust models, empty for the sample-average model.
    pub duals: Option<DualLayout>,
    pub bounds: Option<DualBounds>,
}

impl Formulation {
    pub fn decision(&self, values: &[f64]) -> LocationDecision {
        LocationDecision::from_values(&self.y.iter().map(|v| values[v.0]).collect::<Vec<_>>())
    }

    /// Names of the delta/gamma variables sitting within `1e-6` of their
    /// upper bound in `values`; a nonempty list means the bounds may be
    /// cutting off the optimal dual.
    pub fn binding_duals(&self, values: &[f64]) -> Vec<String> {
        let Some(d) = &self.duals else {
            return Vec::new();
        };
        d.delta1
            .iter()
            .chain(&d.delta2)
            .chain(&d.gamma1)
            .chain(&d.gamma2)
            .filter(|v| {
                let var = self.model.variable(**v);
                values[v.0] >= var.upper - 1e-6
            })
            .map(|v| self.model.variable(*v).name.clone())
            .collect()
    }

    /// Fixes every location binary to the given plan.
    pub fn fix_decision(&mut self, y: &LocationDecision) {
        for (i, v) in self.y.iter().enumerate() {
            let x = y.value(i);
            self.model.set_bounds(*v, x, x);
        }
    }
}

/// Builds the exact mixed-integer reformulation.
pub fn build_dddr(
    instance: &Instance,
    model: &DemandModel,
    bounds: &DualBounds,
    budget: Option<usize>,
    with_cuts: bool,
) -> Result<Formulation> {
    ensure_valid(instance, model)?;
    let ni = instance.num_facilities();
    let nj = instance.num_customers();
    bounds.check(nj)?;
    let pts = model.support.points();
    let fid = |i: usize| instance.facilities[i].id;
    let cid = |j: usize| instance.customers[j].id;

    let mut m = MilpModel::new("dddr");
    let y: Vec<VarId> = (0..ni)
        .map(|i| m.add_binary(format!("y_{}", fid(i))))
        .collect::<Result<_>>()?;
    for (i, v) in y.iter().enumerate() {
        m.add_objective(*v, instance.facilities[i].open_cost);
    }

    // shared products y_l y_m for the cut rows
    let mut pair: Vec<Vec<Option<VarId>>> = vec![vec![None; ni]; ni];
    if with_cuts {
        for l in 0..ni {
            for mm in 0..l {
                let used = (0..nj).any(|j| model.lambda_mu[j][l] * model.lambda_mu[j][mm] != 0.0);
                if !used {
                    continue;
                }
                let name = format!("Y_{}_{}", fid(l), fid(mm));
                let v = m.add_continuous(name.clone(), 0.0, 1.0)?;
                let rows = mccormick_bilinear(&name, v, y[l], y[mm], 0.0, 1.0)?;
                m.add_rows(rows)?;
                pair[l][mm] = Some(v);
            }
        }
    }

    let mut layout = DualLayout {
        alpha: Vec::with_capacity(nj),
        delta1: Vec::with_capacity(nj),
        delta2: Vec::with_capacity(nj),
        gamma1: Vec::with_capacity(nj),
        gamma2: Vec::with_capacity(nj),
    };

    for j in 0..nj {
        let c = cid(j);
        let mu = model.bar_mu[j];
        let sig2 = model.bar_sigma[j].powi(2);
        let eps = model.eps_mu[j];
        let (elo, ehi) = (model.eps_sigma_lo[j], model.eps_sigma_hi[j]);
        let lam = &model.lambda_mu[j];
        let base2 = sig2 + mu * mu;

        let alpha = m.add_continuous(format!("alpha_{c}"), f64::NEG_INFINITY, f64::INFINITY)?;
        let d1 = m.add_continuous(format!("d1_{c}"), 0.0, bounds.ub_delta1[j])?;
        let d2 = m.add_continuous(format!("d2_{c}"), 0.0, bounds.ub_delta2[j])?;
        let g1 = m.add_continuous(format!("g1_{c}"), 0.0, bounds.ub_gamma1[j])?;
        let g2 = m.add_continuous(format!("g2_{c}"), 0.0, bounds.ub_gamma2[j])?;
        m.add_objective(alpha, 1.0);
        m.add_objective(d1, mu + eps);
        m.add_objective(d2, -(mu - eps));
        m.add_objective(g1, base2 * ehi);
        m.add_objective(g2, -base2 * elo);

        // dual variable, its bound, objective weight and envelope family tag
        let duals = [
            (d1, bounds.ub_delta1[j], "D1"),
            (d2, bounds.ub_delta2[j], "D2"),
            (g1, bounds.ub_gamma1[j], "G1"),
            (g2, bounds.ub_gamma2[j], "G2"),
        ];
        for i in 0..ni {
            let big = big_lambda(model, j, i)?;
            let coeffs = [mu * lam[i], -mu * lam[i], ehi * big, -elo * big];
            for ((eta, hi, tag), coef) in duals.iter().zip(coeffs) {
                if coef == 0.0 {
                    continue;
                }
                let name = format!("{tag}_{c}_{}", fid(i));
                let w = m.add_continuous(name.clone(), 0.0, *hi)?;
                m.add_objective(w, coef);
                m.add_rows(mccormick_bilinear(&name, w, *eta, y[i], 0.0, *hi)?)?;
            }
        }
        for l in 0..ni {
            for mm in 0..l {
                let base = 2.0 * mu * mu * lam[l] * lam[mm];
                for (eta, hi, tag, weight) in [
                    (g1, bounds.ub_gamma1[j], "P1", ehi),
                    (g2, bounds.ub_gamma2[j], "P2", -elo),
                ] {
                    let coef = base * weight;
                    if coef == 0.0 {
                        continue;
                    }
                    let name = format!("{tag}_{c}_{}_{}", fid(l), fid(mm));
                    let w = m.add_continuous(name.clone(), 0.0, hi)?;
                    m.add_objective(w, coef);
                    m.add_rows(mccormick_trilinear(&name, w, eta, y[l], y[mm], 0.0, hi)?)?;
                }
            }
        }

        // covering rows: alpha + (d1 - d2) d + (g1 - g2) d^2 >= theta piece
        for (k, d) in pts.iter().enumerate() {
            for piece in theta_affine(instance, j, *d)? {
                let tag = match piece.star {
                    crate::inner::Argmax::Penalty => "p".to_string(),
                    crate::inner::Argmax::Facility(i) => fid(i).to_string(),
                };
                let mut coeffs = vec![(alpha, 1.0), (d1, *d), (d2, -d), (g1, d * d), (g2, -d * d)];
                for (i, a) in piece.coeff.iter().enumerate() {
                    if *a != 0.0 {
                        coeffs.push((y[i], -a));
                    }
                }
                m.add_constraint(
                    format!("cov_{c}_{}_{tag}", k + 1),
                    coeffs,
                    ConstraintSense::Ge,
                    piece.constant,
                )?;
            }
        }

        if with_cuts {
            for (r, ray) in extreme_rays(pts)?.iter().enumerate() {
                let lin = ray.delta1 - ray.delta2;
                let quad = ray.gamma1 * ehi - ray.gamma2 * elo;
                let constant =
                    ray.alpha + ray.delta1 * (mu + eps) - ray.delta2 * (mu - eps) + quad * base2;
                let mut coeffs = Vec::new();
                for i in 0..ni {
                    let a = lin * mu * lam[i] + quad * big_lambda(model, j, i)?;
                    if a != 0.0 {
                        coeffs.push((y[i], a));
                    }
                }
                for l in 0..ni {
                    for mm in 0..l {
                        let a = quad * 2.0 * mu * mu * lam[l] * lam[mm];
                        if a != 0.0 {
                            let v = pair[l][mm].expect("pair product created for nonzero weight");
                            coeffs.push((v, a));
                        }
                    }
                }
                m.add_constraint(
                    format!("cut{}_{c}", r + 1),
                    coeffs,
                    ConstraintSense::Ge,
                    -constant,
                )?;
            }
        }

        layout.alpha.push(alpha);
        layout.delta1.push(d1);
        layout.delta2.push(d2);
        layout.gamma1.push(g1);
        layout.gamma2.push(g2);
    }

    if let Some(b) = budget {
        m.add_constraint(
            "budget",
            y.iter().map(|v| (*v, 1.0)),
            ConstraintSense::Le,
            b as f64,
        )?;
    }

    Ok(Formulation {
        model: m,
        y,
        duals: Some(layout),
        bounds: Some(bounds.clone()),
    })
}

/// Decision-independent robust model: the same construction with all
/// dependency weights set to zero.
pub fn build_dr(
    instance: &Instance,
    model: &DemandModel,
    bounds: &DualBounds,
    budget: Option<usize>,
) -> Result<Formulation> {
    let mut f = build_dddr(instance, &model.without_dependency(), bounds, budget, false)?;
    f.model.name = "dr".into();
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::dual_lp;
    use crate::experiment::{generate_instance, ExperimentConfig, LambdaRecipe};
    use crate::model::Support;
    use crate::solvers::simplex::simplex_solve;

    fn tiny(seed: u64, ni: usize, nj: usize) -> (Instance, DemandModel) {
        let cfg = ExperimentConfig {
            facilities: ni,
            customers: nj,
            support: Support::grid(10.0, 100.0, 10.0).unwrap().spec(),
            lambda: LambdaRecipe::Distance {
                scale: 25.0,
                row_sum: 0.9,
            },
            ..Default::default()
        };
        generate_instance(&cfg, seed).unwrap()
    }

    #[test]
    fn covering_row_count() {
        let (inst, dm) = tiny(3, 3, 4);
        let b = DualBounds::flat_default(4);
        let f = build_dddr(&inst, &dm, &b, None, false).unwrap();
        let cov = f
            .model
            .constraints()
            .iter()
            .filter(|c| c.name.starts_with("cov_"))
            .count();
        assert_eq!(cov, 4 * 10 * (3 + 1));
    }

    #[test]
    fn zero_dependency_has_no_products() {
        let (inst, dm) = tiny(5, 3, 3);
        let b = DualBounds::flat_default(3);
        let f = build_dr(&inst, &dm, &b, None).unwrap();
        let products = f
            .model
            .variables()
            .iter()
            .filter(|v| ["D", "G", "P", "Y"].iter().any(|p| v.name.starts_with(p)))
            .count();
        assert_eq!(products, 0);
        assert!(build_dddr(&inst, &dm, &DualBounds::uniform(3, 0.0), None, false).is_err());
    }

    #[test]
    fn fixed_plan_restriction_matches_dual_lp() {
        let (inst, dm) = tiny(11, 3, 3);
        let bounds = DualBounds::certified(&inst, &dm).unwrap();
        for with_cuts in [false, true] {
            let base = build_dddr(&inst, &dm, &bounds, None, with_cuts).unwrap();
            for mask in 0..8u64 {
                let y = LocationDecision::from_mask(mask, 3);
                let mut f = base.clone();
                f.fix_decision(&y);
                for v in &f.y {
                    f.model.set_objective(*v, 0.0);
                }
                // binaries are fixed, so relaxing them changes nothing
                let lp = crate::solvers::simplex::solve_lp(
                    &crate::solvers::simplex::LpProblem::from_model(&f.model, true).unwrap(),
                    &crate::solvers::simplex::SimplexOptions::fast(),
                )
                .unwrap();
                let (want, _) = dual_lp(&inst, &dm, &y).unwrap();
                assert!(
                    (lp.objective - want).abs() <= 1e-6 * (1.0 + want.abs()),
                    "mask {mask}: restricted {} dual {}",
                    lp.objective,
                    want
                );
            }
        }
        // plain simplex refuses binaries
        assert!(
            simplex_solve(&build_dddr(&inst, &dm, &bounds, None, false).unwrap().model).is_err()
        );
    }
}
