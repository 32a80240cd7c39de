//! Exact linearizations of `eta * z` and `eta * z1 * z2` for bounded `eta`
//! and binary `z`.

use super::{Constraint, ConstraintSense, VarId};
use crate::error::{Error, Result};

fn row(name: String, coeffs: Vec<(VarId, f64)>, sense: ConstraintSense, rhs: f64) -> Constraint {
    let coeffs = coeffs.into_iter().filter(|(_, a)| *a != 0.0).collect();
    Constraint {
        name,
        coeffs,
        sense,
        rhs,
    }
}

/// Rows forcing `w = eta * z` when `eta in [lo, hi]` and `z` is binary:
/// `eta - (1 - z) hi <= w <= eta - lo (1 - z)` and `lo z <= w <= hi z`.
pub fn mccormick_bilinear(
    w_name: &str,
    w: VarId,
    eta: VarId,
    z: VarId,
    lo: f64,
    hi: f64,
) -> Result<Vec<Constraint>> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Model(format!(
            "envelope for {w_name} needs finite lo <= hi, got [{lo}, {hi}]"
        )));
    }
    use ConstraintSense::*;
    Ok(vec![
        row(
            format!("{w_name}_mc1"),
            vec![(w, 1.0), (eta, -1.0), (z, -hi)],
            Ge,
            -hi,
        ),
        row(
            format!("{w_name}_mc2"),
            vec![(w, 1.0), (eta, -1.0), (z, -lo)],
            Le,
            -lo,
        ),
        row(format!("{w_name}_mc3"), vec![(w, 1.0), (z, -lo)], Ge, 0.0),
        row(format!("{w_name}_mc4"), vec![(w, 1.0), (z, -hi)], Le, 0.0),
    ])
}

/// Rows forcing `w = eta * z1 * z2` when `0 <= lo <= eta <= hi`; `w` itself
/// must be declared with bounds `[0, hi]`.
pub fn mccormick_trilinear(
    w_name: &str,
    w: VarId,
    eta: VarId,
    z1: VarId,
    z2: VarId,
    lo: f64,
    hi: f64,
) -> Result<Vec<Constraint>> {
    if !(0.0 <= lo && lo <= hi) || !hi.is_finite() {
        return Err(Error::Model(format!(
            "envelope for {w_name} needs finite 0 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    use ConstraintSense::*;
    Ok(vec![
        row(format!("{w_name}_mc1"), vec![(w, 1.0), (z1, -hi)], Le, 0.0),
        row(format!("{w_name}_mc2"), vec![(w, 1.0), (z2, -hi)], Le, 0.0),
        row(
            format!("{w_name}_mc3"),
            vec![(w, 1.0), (eta, -1.0), (z1, -lo)],
            Le,
            -lo,
        ),
        row(
            format!("{w_name}_mc4"),
            vec![(w, 1.0), (eta, -1.0), (z2, -lo)],
            Le,
            -lo,
        ),
        row(
            format!("{w_name}_mc5"),
            vec![(w, 1.0), (z1, -lo), (z2, -lo)],
            Ge,
            -lo,
        ),
        row(
            format!("{w_name}_mc6"),
            vec![(w, 1.0), (eta, -1.0), (z1, -hi), (z2, -hi)],
            Ge,
            -2.0 * hi,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{MilpModel, VarKind};
    use crate::solvers::simplex::{solve_lp, LpProblem, LpStatus, ObjSense, SimplexOptions};

    fn feasible(rows: &[Constraint], point: &[f64]) -> bool {
        rows.iter().all(|r| r.violation(point) <= 1e-12)
    }

    #[test]
    fn bilinear_examples() {
        let (w, eta, z) = (VarId(0), VarId(1), VarId(2));
        let rows = mccormick_bilinear("w", w, eta, z, 0.0, 100.0).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(feasible(&rows, &[40.0, 40.0, 1.0]));
        assert!(!feasible(&rows, &[50.0, 40.0, 1.0]));
        assert!(feasible(&rows, &[0.0, 40.0, 0.0]));
        assert!(!feasible(&rows, &[1.0, 40.0, 0.0]));
        assert!(mccormick_bilinear("w", w, eta, z, 2.0, 1.0).is_err());
    }

    /// Range of `w` admitted by the rows at fixed `(eta, z...)`, by LP.
    fn w_range(rows: &[Constraint], fixed: &[(usize, f64)], n: usize, w_hi: f64) -> (f64, f64) {
        let mut m = MilpModel::new("probe");
        for i in 0..n {
            m.add_var(
                format!("v{i}"),
                VarKind::Continuous,
                0.0,
                if i == 0 { w_hi } else { f64::INFINITY },
            )
            .unwrap();
        }
        for r in rows {
            m.add_constraint(r.name.clone(), r.coeffs.clone(), r.sense, r.rhs)
                .unwrap();
        }
        for (i, v) in fixed {
            m.set_bounds(VarId(*i), *v, *v);
        }
        let mut out = [0.0; 2];
        for (slot, sense) in [ObjSense::Minimize, ObjSense::Maximize]
            .into_iter()
            .enumerate()
        {
            let mut lp = LpProblem::from_model(&m, false).unwrap();
            lp.sense = sense;
            lp.objective[0] = 1.0;
            let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            out[slot] = s.objective;
        }
        (out[0], out[1])
    }

    #[test]
    fn bilinear_is_exact_at_binary_points() {
        let rows = mccormick_bilinear("w", VarId(0), VarId(1), VarId(2), 0.0, 100.0).unwrap();
        for eta in [0.0, 37.5, 100.0] {
            for z in [0.0, 1.0] {
                let (lo, hi) = w_range(&rows, &[(1, eta), (2, z)], 3, f64::INFINITY);
                assert!((lo - eta * z).abs() < 1e-9 && (hi - eta * z).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trilinear_is_exact_at_binary_points() {
        for (lo_eta, hi_eta) in [(0.0, 100.0), (10.0, 100.0)] {
            let rows =
                mccormick_trilinear("w", VarId(0), VarId(1), VarId(2), VarId(3), lo_eta, hi_eta)
                    .unwrap();
            assert_eq!(rows.len(), 6);
            for eta in [lo_eta, 0.5 * hi_eta, hi_eta] {
                for z1 in [0.0, 1.0] {
                    for z2 in [0.0, 1.0] {
                        let (lo, hi) = w_range(&rows, &[(1, eta), (2, z1), (3, z2)], 4, hi_eta);
                        let want = eta * z1 * z2;
                        assert!(
                            (lo - want).abs() < 1e-9 && (hi - want).abs() < 1e-9,
                            "eta={eta} z=({z1},{z2}) range=({lo},{hi})"
                        );
                    }
                }
            }
        }
        assert!(
            mccormick_trilinear("w", VarId(0), VarId(1), VarId(2), VarId(3), -1.0, 1.0).is_err()
        );
    }
}
