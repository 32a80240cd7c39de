//! Second-stage transport/penalty cost for a fixed plan and realized demand.
//!
//! With `c_0j := p_j` the per-customer optimum of the transport problem is
//!
//! ```text
//! h_j(y, d) = max_{i* in {0} u I} [ c_{i*j} d + sum_{i: c_ij < c_{i*j}} C_i y_i (c_ij - c_{i*j}) ] - r_j d
//! ```
//!
//! Capacity bounds `x_ij <= C_i y_i` are per (facility, customer) pair, so
//! customers never compete for capacity and the problem splits by customer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::milp::ConstraintSense;
use crate::model::{Instance, LocationDecision};
use crate::solvers::simplex::{solve_lp, LpProblem, ObjSense, SimplexOptions};

/// Maximizing candidate in the closed form: the penalty column or a facility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Argmax {
    Penalty,
    Facility(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// `x[i][j]`
    pub x: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub value: f64,
}

impl Allocation {
    pub fn total_unmet(&self) -> f64 {
        self.s.iter().sum()
    }
}

fn check_dims(instance: &Instance, y: &LocationDecision) -> Result<()> {
    if y.len() != instance.num_facilities() {
        return Err(Error::Dimension(format!(
            "decision has {} entries for {} facilities",
            y.len(),
            instance.num_facilities()
        )));
    }
    Ok(())
}

/// Unit cost of candidate `star`.
#[inline]
fn star_cost(instance: &Instance, j: usize, star: Argmax) -> f64 {
    match star {
        Argmax::Penalty => instance.customers[j].penalty,
        Argmax::Facility(i) => instance.c(i, j),
    }
}

fn candidates(n: usize) -> impl Iterator<Item = Argmax> {
    std::iter::once(Argmax::Penalty).chain((0..n).map(Argmax::Facility))
}

/// Closed-form `h_j(y, d)` and the maximizing candidate (first index on ties).
pub fn h_j_closed_form(
    instance: &Instance,
    y: &LocationDecision,
    j: usize,
    d: f64,
) -> Result<(f64, Argmax)> {
    check_dims(instance, y)?;
    if j >= instance.num_customers() {
        return Err(Error::UnknownCustomer(j));
    }
    if d < 0.0 || d.is_nan() {
        return Err(Error::NegativeDemand(d));
    }
    let mut best = (f64::NEG_INFINITY, Argmax::Penalty);
    for star in candidates(instance.num_facilities()) {
        let cs = star_cost(instance, j, star);
        let mut v = cs * d;
        for (i, f) in instance.facilities.iter().enumerate() {
            let cij = instance.c(i, j);
            if y.is_open(i) && cij < cs {
                v += f.capacity * (cij - cs);
            }
        }
        if v > best.0 {
            best = (v, star);
        }
    }
    Ok((best.0 - instance.customers[j].revenue * d, best.1))
}

/// `h(y, d) = sum_j h_j(y, d_j)`.
pub fn h_closed_form(instance: &Instance, y: &LocationDecision, d: &[f64]) -> Result<f64> {
    if d.len() != instance.num_customers() {
        return Err(Error::Dimension(format!(
            "demand vector has {} entries for {} customers",
            d.len(),
            instance.num_customers()
        )));
    }
    let mut total = 0.0;
    for (j, dj) in d.iter().enumerate() {
        total += h_j_closed_form(instance, y, j, *dj)?.0;
    }
    Ok(total)
}

/// Greedy primal solution: each customer draws from open facilities in
/// ascending unit cost (smaller index on ties) up to `C_i`, the rest is unmet.
pub fn recover_allocation(
    instance: &Instance,
    y: &LocationDecision,
    d: &[f64],
) -> Result<Allocation> {
    check_dims(instance, y)?;
    let (ni, nj) = (instance.num_facilities(), instance.num_customers());
    if d.len() != nj {
        return Err(Error::Dimension(format!(
            "demand vector has {} entries for {nj} customers",
            d.len()
        )));
    }
    let mut x = vec![vec![0.0; nj]; ni];
    let mut s = vec![0.0; nj];
    let mut value = 0.0;
    let open = y.open_indices();
    for j in 0..nj {
        if d[j] < 0.0 || d[j].is_nan() {
            return Err(Error::NegativeDemand(d[j]));
        }
        let mut order = open.clone();
        order.sort_by(|a, b| {
            instance
                .c(*a, j)
                .total_cmp(&instance.c(*b, j))
                .then(a.cmp(b))
        });
        let mut left = d[j];
        for i in order {
            if left <= 0.0 {
                break;
            }
            let q = left.min(instance.facilities[i].capacity);
            x[i][j] = q;
            value += instance.c(i, j) * q;
            left -= q;
        }
        s[j] = left.max(0.0);
        value += instance.customers[j].penalty * s[j] - instance.customers[j].revenue * d[j];
    }
    Ok(Allocation { x, s, value })
}

/// Optimal value of the transport LP, solved by simplex. Test oracle.
pub fn transport_lp_oracle(instance: &Instance, y: &LocationDecision, d: &[f64]) -> Result<f64> {
    check_dims(instance, y)?;
    let (ni, nj) = (instance.num_facilities(), instance.num_customers());
    if d.len() != nj {
        return Err(Error::Dimension("demand vector length".into()));
    }
    let xv = |i: usize, j: usize| i * nj + j;
    let sv = |j: usize| ni * nj + j;
    let mut lp = LpProblem::new(ObjSense::Minimize, ni * nj + nj);
    for i in 0..ni {
        for j in 0..nj {
            lp.objective[xv(i, j)] = instance.c(i, j);
            lp.upper[xv(i, j)] = instance.facilities[i].capacity * y.value(i);
        }
    }
    for j in 0..nj {
        lp.objective[sv(j)] = instance.customers[j].penalty;
        lp.constant -= instance.customers[j].revenue * d[j];
        let mut row: Vec<(usize, f64)> = (0..ni).map(|i| (xv(i, j), 1.0)).collect();
        row.push((sv(j), 1.0));
        lp.add_row(row, ConstraintSense::Eq, d[j]);
    }
    Ok(solve_lp(&lp, &SimplexOptions::default())?
        .into_optimal()?
        .objective)
}

/// One affine piece `constant + coeff . y` of `theta_j(y)` at demand `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaPiece {
    pub star: Argmax,
    pub constant: f64,
    pub coeff: Vec<f64>,
}

impl ThetaPiece {
    pub fn eval(&self, y: &LocationDecision) -> f64 {
        self.constant
            + self
                .coeff
                .iter()
                .enumerate()
                .map(|(i, c)| c * y.value(i))
                .sum::<f64>()
    }
}

/// Affine family whose pointwise max over candidates equals `h_j(y, d)`;
/// the penalty candidate comes first.
pub fn theta_affine(instance: &Instance, j: usize, d: f64) -> Result<Vec<ThetaPiece>> {
    if j >= instance.num_customers() {
        return Err(Error::UnknownCustomer(j));
    }
    let r = instance.customers[j].revenue;
    Ok(candidates(instance.num_facilities())
        .map(|star| {
            let cs = star_cost(instance, j, star);
            let coeff = instance
                .facilities
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let cij = instance.c(i, j);
                    if cij < cs {
                        f.capacity * (cij - cs)
                    } else {
                        0.0
                    }
                })
                .collect();
            ThetaPiece {
                star,
                constant: (cs - r) * d,
                coeff,
            }
        })
        .collect())
}

/// `h_j(y, d_k)` for every point of a support.
pub fn cost_profile(
    instance: &Instance,
    y: &LocationDecision,
    j: usize,
    points: &[f64],
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|d| h_j_closed_form(instance, y, j, *d).map(|v| v.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Customer, Facility};
    use proptest::prelude::*;

    pub(crate) fn small(c: Vec<Vec<f64>>, cap: Vec<f64>, p: f64, r: f64) -> Instance {
        let nj = c[0].len();
        Instance {
            facilities: cap
                .iter()
                .enumerate()
                .map(|(i, c)| Facility {
                    id: i + 1,
                    x: 0.0,
                    y: 0.0,
                    open_cost: 0.0,
                    capacity: *c,
                })
                .collect(),
            customers: (0..nj)
                .map(|j| Customer {
                    id: j + 1,
                    x: 0.0,
                    y: 0.0,
                    penalty: p,
                    revenue: r,
                })
                .collect(),
            cost: c,
        }
    }

    #[test]
    fn closed_form_examples() {
        let one = small(vec![vec![1.0]], vec![10.0], 3.0, 2.0);
        let y = LocationDecision::all_open(1);
        let (v, star) = h_j_closed_form(&one, &y, 0, 15.0).unwrap();
        assert!((v + 5.0).abs() < 1e-12);
        assert_eq!(star, Argmax::Penalty);
        let closed = LocationDecision::closed(1);
        assert_eq!(h_j_closed_form(&one, &closed, 0, 15.0).unwrap().0, 15.0);

        let two = small(vec![vec![1.0], vec![2.0]], vec![5.0, 5.0], 4.0, 0.0);
        let y = LocationDecision::all_open(2);
        assert!((h_j_closed_form(&two, &y, 0, 12.0).unwrap().0 - 23.0).abs() < 1e-12);
        let a = recover_allocation(&two, &y, &[12.0]).unwrap();
        assert_eq!((a.x[0][0], a.x[1][0], a.s[0]), (5.0, 5.0, 2.0));
        assert!((a.value - 23.0).abs() < 1e-12);
        assert!((transport_lp_oracle(&two, &y, &[12.0]).unwrap() - 23.0).abs() < 1e-9);

        assert!(matches!(
            h_j_closed_form(&two, &y, 0, -1.0),
            Err(Error::NegativeDemand(_))
        ));
        assert_eq!(h_closed_form(&two, &y, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn allocation_edge_cases() {
        let one = small(vec![vec![1.0]], vec![100.0], 3.0, 0.0);
        let a = recover_allocation(&one, &LocationDecision::all_open(1), &[7.0]).unwrap();
        assert_eq!((a.x[0][0], a.s[0]), (7.0, 0.0));
        let a = recover_allocation(&one, &LocationDecision::closed(1), &[7.0]).unwrap();
        assert_eq!((a.x[0][0], a.s[0]), (0.0, 7.0));
    }

    #[test]
    fn theta_family_structure() {
        let two = small(vec![vec![1.0], vec![2.0]], vec![5.0, 5.0], 4.0, 1.0);
        let fam = theta_affine(&two, 0, 10.0).unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(fam[0].star, Argmax::Penalty);
        assert_eq!(fam[0].constant, 30.0);
        assert_eq!(fam[0].coeff, vec![-15.0, -10.0]);
        // cheapest facility has an empty sum
        assert_eq!(fam[1].coeff, vec![0.0, 0.0]);
    }

    fn instance_strategy() -> impl Strategy<Value = (Instance, LocationDecision, Vec<f64>)> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(ni, nj)| {
            (
                prop::collection::vec(prop::collection::vec(0.0f64..50.0, nj), ni),
                prop::collection::vec(1.0f64..30.0, ni),
                prop::collection::vec(0.0f64..30.0, nj),
                prop::collection::vec(any::<bool>(), ni),
                prop::collection::vec(0.0f64..100.0, nj),
            )
                .prop_map(|(c, cap, r, y, d)| {
                    let mut inst = small(c, cap, 60.0, 0.0);
                    for (cu, rv) in inst.customers.iter_mut().zip(r) {
                        cu.revenue = rv;
                    }
                    (inst, LocationDecision::new(y), d)
                })
        })
    }

    proptest! {
        #[test]
        fn closed_form_matches_lp_and_greedy((inst, y, d) in instance_strategy()) {
            let h = h_closed_form(&inst, &y, &d).unwrap();
            let lp = transport_lp_oracle(&inst, &y, &d).unwrap();
            prop_assert!((h - lp).abs() < 1e-6, "closed {h} lp {lp}");
            let a = recover_allocation(&inst, &y, &d).unwrap();
            prop_assert!((a.value - h).abs() < 1e-7 * (1.0 + h.abs()));
            for j in 0..d.len() {
                let shipped: f64 = (0..y.len()).map(|i| a.x[i][j]).sum();
                prop_assert!((shipped + a.s[j] - d[j]).abs() < 1e-12);
                prop_assert!(a.s[j] >= 0.0);
                for i in 0..y.len() {
                    prop_assert!(a.x[i][j] >= 0.0);
                    prop_assert!(a.x[i][j] <= inst.facilities[i].capacity * y.value(i));
                }
            }
        }

        #[test]
        fn theta_max_equals_closed_form((inst, y, d) in instance_strategy()) {
            for j in 0..d.len() {
                let fam = theta_affine(&inst, j, d[j]).unwrap();
                let m = fam.iter().map(|p| p.eval(&y)).fold(f64::NEG_INFINITY, f64::max);
                let h = h_j_closed_form(&inst, &y, j, d[j]).unwrap().0;
                prop_assert!((m - h).abs() < 1e-9 * (1.0 + h.abs()));
            }
        }

        #[test]
        fn convex_in_demand((inst, y, d) in instance_strategy(), e in 0.0f64..100.0) {
            for j in 0..d.len() {
                let f = |v: f64| h_j_closed_form(&inst, &y, j, v).unwrap().0;
                let mid = f(0.5 * (d[j] + e));
                prop_assert!(mid <= 0.5 * (f(d[j]) + f(e)) + 1e-9);
            }
        }

        #[test]
        fn opening_never_hurts((inst, y, d) in instance_strategy(), pick in any::<prop::sample::Index>()) {
            let i = pick.index(y.len());
            let mut more = y.as_slice().to_vec();
            more[i] = true;
            let more = LocationDecision::new(more);
            prop_assert!(h_closed_form(&inst, &more, &d).unwrap() <= h_closed_form(&inst, &y, &d).unwrap() + 1e-9);
        }
    }
}
