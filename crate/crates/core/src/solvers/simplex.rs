//! Dense-tableau bounded-variable primal simplex with a two-phase start.
//!
//! Columns are shifted/flipped/split so every working variable lives in
//! `[0, ub]`; upper bounds are handled in the ratio test by bound flips rather
//! than extra rows. Duals are reported as shadow prices of the caller's
//! objective with respect to each row's right-hand side.

use crate::error::{Error, Result};
use crate::milp::{ConstraintSense, MilpModel, VarKind};

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-8;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    /// Smallest eligible index enters, smallest basic index leaves on ties.
    Bland,
    /// Most negative reduced cost, falling back to Bland after a run of
    /// degenerate pivots.
    DantzigThenBland,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub pricing: Pricing,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pricing: Pricing::Bland,
            max_iterations: 200_000,
        }
    }
}

impl SimplexOptions {
    pub fn fast() -> Self {
        SimplexOptions {
            pricing: Pricing::DantzigThenBland,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: ObjSense,
    pub objective: Vec<f64>,
    pub constant: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new(sense: ObjSense, num_vars: usize) -> Self {
        LpProblem {
            sense,
            objective: vec![0.0; num_vars],
            constant: 0.0,
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: ConstraintSense, rhs: f64) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    /// Converts a model. Binaries are relaxed to their bounds when `relax`
    /// is set and rejected otherwise.
    pub fn from_model(m: &MilpModel, relax: bool) -> Result<Self> {
        if !relax && m.variables().iter().any(|v| v.kind == VarKind::Binary) {
            return Err(Error::Model(
                "simplex needs a continuous model; relax or fix the binaries".into(),
            ));
        }
        Ok(LpProblem {
            sense: ObjSense::Minimize,
            objective: m.objective().to_vec(),
            constant: m.objective_constant,
            lower: m.variables().iter().map(|v| v.lower).collect(),
            upper: m.variables().iter().map(|v| v.upper).collect(),
            rows: m
                .constraints()
                .iter()
                .map(|c| LpRow {
                    coeffs: c.coeffs.iter().map(|(v, a)| (v.0, *a)).collect(),
                    sense: c.sense,
                    rhs: c.rhs,
                })
                .collect(),
        })
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|(j, a)| a * x[*j]).sum();
            let viol = match row.sense {
                ConstraintSense::Le => lhs - row.rhs,
                ConstraintSense::Ge => row.rhs - lhs,
                ConstraintSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Shadow price of each row: change of the objective per unit of rhs.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn empty(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            duals: Vec::new(),
            objective: f64::NAN,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Turns non-optimal statuses into errors.
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::LpInfeasible),
            LpStatus::Unbounded => Err(Error::LpUnbounded),
        }
    }
}

/// Solves a continuous model with default options.
pub fn simplex_solve(m: &MilpModel) -> Result<LpSolution> {
    solve_lp(
        &LpProblem::from_model(m, false)?,
        &SimplexOptions::default(),
    )
}

#[derive(Debug, Clone, Copy)]
enum ColMap {
    Shift { col: usize, lo: f64 },
    Flip { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    n: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    ub: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    d: Vec<f64>,
    barred: Vec<bool>,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.n + j]
    }

    fn value_of_nonbasic(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.ub[j]
        } else {
            0.0
        }
    }

    fn set_costs(&mut self, c: &[f64]) {
        self.d.copy_from_slice(c);
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.n..(i + 1) * self.n];
                for (dj, a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn choose_entering(&self, is_basic: &[bool]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n {
            if is_basic[j] || self.barred[j] || self.ub[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let dir = if !self.at_upper[j] && dj < -COST_TOL {
                1.0
            } else if self.at_upper[j] && dj > COST_TOL {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = dj.abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn step(&mut self, is_basic: &mut [bool], max_iter: usize) -> Result<Step> {
        let Some((q, dir)) = self.choose_entering(is_basic) else {
            return Ok(Step::Optimal);
        };
        if self.iterations >= max_iter {
            return Err(Error::IterationLimit(max_iter));
        }
        self.iterations += 1;

        // ratio test
        let mut limit = self.ub[q];
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let alpha = dir * self.at(i, q);
            let bound = if alpha > PIVOT_TOL {
                (self.beta[i] / alpha).max(0.0)
            } else if alpha < -PIVOT_TOL {
                let u = self.ub[self.basis[i]];
                if u.is_finite() {
                    ((u - self.beta[i]) / -alpha).max(0.0)
                } else {
                    continue;
                }
            } else {
                continue;
            };
            let take = match leave {
                None => bound < limit,
                Some((r, a)) => {
                    if bound < limit - 1e-12 {
                        true
                    } else if bound <= limit + 1e-12 {
                        if self.bland {
                            self.basis[i] < self.basis[r]
                        } else {
                            alpha.abs() > a.abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if take {
                limit = bound;
                leave = Some((i, alpha));
            }
        }
        if !limit.is_finite() {
            return Ok(Step::Unbounded);
        }

        if limit < 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > DEGENERATE_SWITCH {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        for i in 0..self.m {
            let a = self.at(i, q);
            if a != 0.0 {
                self.beta[i] -= dir * a * limit;
            }
        }

        match leave {
            None => {
                // bound flip
                self.at_upper[q] = !self.at_upper[q];
            }
            Some((r, alpha)) => {
                let out = self.basis[r];
                self.at_upper[out] = alpha < 0.0;
                is_basic[out] = false;
                let entering_value = if dir > 0.0 {
                    self.value_of_nonbasic(q) + limit
                } else {
                    self.ub[q] - limit
                };
                self.at_upper[q] = false;
                self.pivot(r, q);
                self.beta[r] = entering_value;
                self.basis[r] = q;
                is_basic[q] = true;
            }
        }
        Ok(Step::Moved)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let piv = self.t[r * n + q];
        {
            let row = &mut self.t[r * n..(r + 1) * n];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[r * n..(r + 1) * n].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + q];
            if f != 0.0 {
                let row = &mut self.t[i * n..(i + 1) * n];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, p) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.d[q] = 0.0;
        }
    }

    fn run(&mut self, is_basic: &mut [bool], max_iter: usize) -> Result<Step> {
        loop {
            match self.step(is_basic, max_iter)? {
                Step::Moved => continue,
                other => return Ok(other),
            }
        }
    }
}

/// Solves `lp` to optimality, or reports infeasibility/unboundedness.
pub fn solve_lp(lp: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    let n0 = lp.num_vars();
    if lp.lower.len() != n0 || lp.upper.len() != n0 {
        return Err(Error::Dimension(
            "bound vectors must match objective length".into(),
        ));
    }
    for j in 0..n0 {
        if lp.lower[j] > lp.upper[j] + FEAS_TOL {
            return Ok(LpSolution::empty(LpStatus::Infeasible, 0));
        }
        if lp.lower[j] == f64::INFINITY || lp.upper[j] == f64::NEG_INFINITY {
            return Ok(LpSolution::empty(LpStatus::Infeasible, 0));
        }
    }
    let sign_obj = match lp.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };

    // working columns for the original variables
    let mut maps = Vec::with_capacity(n0);
    let mut ncols = 0usize;
    let mut ub = Vec::new();
    let mut cost = Vec::new();
    for j in 0..n0 {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let c = sign_obj * lp.objective[j];
        if lo.is_finite() {
            maps.push(ColMap::Shift { col: ncols, lo });
            ub.push((hi - lo).max(0.0));
            cost.push(c);
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(ColMap::Flip { col: ncols, hi });
            ub.push(f64::INFINITY);
            cost.push(-c);
            ncols += 1;
        } else {
            maps.push(ColMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ub.extend([f64::INFINITY, f64::INFINITY]);
            cost.extend([c, -c]);
            ncols += 2;
        }
    }

    let m = lp.rows.len();
    let n_slack = lp
        .rows
        .iter()
        .filter(|r| r.sense != ConstraintSense::Eq)
        .count();

    // assemble rows densely, then decide artificials
    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut slack_of: Vec<Option<(usize, f64)>> = Vec::with_capacity(m);
    let mut next_slack = ncols;
    for row in &lp.rows {
        let mut a = vec![0.0; ncols + n_slack];
        let mut b = row.rhs;
        for &(j, coef) in &row.coeffs {
            if j >= n0 {
                return Err(Error::Dimension(format!("row references variable {j}")));
            }
            match maps[j] {
                ColMap::Shift { col, lo } => {
                    a[col] += coef;
                    b -= coef * lo;
                }
                ColMap::Flip { col, hi } => {
                    a[col] -= coef;
                    b -= coef * hi;
                }
                ColMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        let slack = match row.sense {
            ConstraintSense::Le => Some((next_slack, 1.0)),
            ConstraintSense::Ge => Some((next_slack, -1.0)),
            ConstraintSense::Eq => None,
        };
        if let Some((s, v)) = slack {
            a[s] = v;
            next_slack += 1;
        }
        dense.push(a);
        rhs.push(b);
        slack_of.push(slack);
    }
    let mut row_sign = vec![1.0; m];
    for i in 0..m {
        if rhs[i] < 0.0 {
            row_sign[i] = -1.0;
            rhs[i] = -rhs[i];
            dense[i].iter_mut().for_each(|v| *v = -*v);
        }
    }
    let needs_art: Vec<bool> = (0..m)
        .map(|i| match slack_of[i] {
            Some((_, v)) => v * row_sign[i] < 0.0,
            None => true,
        })
        .collect();
    let n_art = needs_art.iter().filter(|v| **v).count();
    let n = ncols + n_slack + n_art;
    ub.extend(std::iter::repeat_n(f64::INFINITY, n_slack + n_art));
    cost.extend(std::iter::repeat_n(0.0, n_slack + n_art));

    let mut t = vec![0.0; m * n];
    let mut basis = Vec::with_capacity(m);
    let mut init_col = Vec::with_capacity(m);
    let mut is_art = vec![false; n];
    let mut next_art = ncols + n_slack;
    for i in 0..m {
        t[i * n..i * n + ncols + n_slack].copy_from_slice(&dense[i]);
        if needs_art[i] {
            t[i * n + next_art] = 1.0;
            is_art[next_art] = true;
            basis.push(next_art);
            init_col.push(next_art);
            next_art += 1;
        } else {
            let (s, _) = slack_of[i].unwrap();
            basis.push(s);
            init_col.push(s);
        }
    }
    drop(dense);

    let mut tab = Tableau {
        m,
        n,
        t,
        beta: rhs.clone(),
        ub,
        at_upper: vec![false; n],
        basis,
        d: vec![0.0; n],
        barred: vec![false; n],
        iterations: 0,
        degenerate_run: 0,
        bland: opts.pricing == Pricing::Bland,
    };
    let mut is_basic = vec![false; n];
    for &b in &tab.basis {
        is_basic[b] = true;
    }

    if n_art > 0 {
        let phase1: Vec<f64> = is_art.iter().map(|a| if *a { 1.0 } else { 0.0 }).collect();
        tab.set_costs(&phase1);
        if let Step::Unbounded = tab.run(&mut is_basic, opts.max_iterations)? {
            return Err(Error::Backend("phase one reported unbounded".into()));
        }
        let infeas: f64 = (0..m)
            .filter(|i| is_art[tab.basis[*i]])
            .map(|i| tab.beta[i])
            .sum();
        let scale = rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if infeas > FEAS_TOL * scale {
            return Ok(LpSolution::empty(LpStatus::Infeasible, tab.iterations));
        }
        for j in 0..n {
            if is_art[j] {
                tab.ub[j] = 0.0;
                tab.barred[j] = true;
                tab.at_upper[j] = false;
            }
        }
        // drive remaining artificials out of the basis where possible
        for r in 0..m {
            if !is_art[tab.basis[r]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..ncols + n_slack {
                if is_basic[j] {
                    continue;
                }
                let a = tab.at(r, j).abs();
                if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((q, _)) = best {
                let out = tab.basis[r];
                let val = tab.value_of_nonbasic(q);
                tab.pivot(r, q);
                tab.beta[r] = val;
                tab.at_upper[q] = false;
                tab.basis[r] = q;
                is_basic[q] = true;
                is_basic[out] = false;
            } else {
                tab.beta[r] = 0.0;
            }
        }
    }

    tab.set_costs(&cost);
    tab.degenerate_run = 0;
    tab.bland = opts.pricing == Pricing::Bland;
    if let Step::Unbounded = tab.run(&mut is_basic, opts.max_iterations)? {
        return Ok(LpSolution::empty(LpStatus::Unbounded, tab.iterations));
    }

    // recover the working point
    let mut w = vec![0.0; n];
    for j in 0..n {
        if !is_basic[j] {
            w[j] = tab.value_of_nonbasic(j);
        }
    }
    for i in 0..m {
        w[tab.basis[i]] = tab.beta[i].max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|mp| match *mp {
            ColMap::Shift { col, lo } => lo + w[col],
            ColMap::Flip { col, hi } => hi - w[col],
            ColMap::Split { pos, neg } => w[pos] - w[neg],
        })
        .collect();
    let duals: Vec<f64> = (0..m)
        .map(|i| {
            let y = -tab.d[init_col[i]];
            sign_obj * row_sign[i] * y
        })
        .collect();
    let objective = lp.constant + lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        duals,
        objective,
        iterations: tab.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn le(c: Vec<(usize, f64)>, b: f64) -> LpRow {
        LpRow {
            coeffs: c,
            sense: ConstraintSense::Le,
            rhs: b,
        }
    }

    #[test]
    fn simplex_picks_max_coefficient() {
        let mut lp = LpProblem::new(ObjSense::Maximize, 4);
        lp.objective = vec![3.0, 7.0, -1.0, 5.0];
        lp.add_row((0..4).map(|j| (j, 1.0)).collect(), ConstraintSense::Eq, 1.0);
        let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_relative_eq!(s.objective, 7.0);
        assert_relative_eq!(s.x[1], 1.0);
        assert_relative_eq!(s.duals[0], 7.0, epsilon = 1e-12);
    }

    #[test]
    fn textbook_max_with_duals() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36, duals (0, 1.5, 1)
        let mut lp = LpProblem::new(ObjSense::Maximize, 2);
        lp.objective = vec![3.0, 5.0];
        lp.rows = vec![
            le(vec![(0, 1.0)], 4.0),
            le(vec![(1, 2.0)], 12.0),
            le(vec![(0, 3.0), (1, 2.0)], 18.0),
        ];
        for pricing in [Pricing::Bland, Pricing::DantzigThenBland] {
            let s = solve_lp(
                &lp,
                &SimplexOptions {
                    pricing,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_relative_eq!(s.objective, 36.0, epsilon = 1e-9);
            assert_relative_eq!(s.x[0], 2.0, epsilon = 1e-9);
            assert_relative_eq!(s.x[1], 6.0, epsilon = 1e-9);
            assert_relative_eq!(s.duals[0], 0.0, epsilon = 1e-9);
            assert_relative_eq!(s.duals[1], 1.5, epsilon = 1e-9);
            assert_relative_eq!(s.duals[2], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LpProblem::new(ObjSense::Minimize, 1);
        lp.add_row(vec![(0, 1.0)], ConstraintSense::Ge, 2.0);
        lp.add_row(vec![(0, 1.0)], ConstraintSense::Le, 1.0);
        let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(matches!(s.into_optimal(), Err(Error::LpInfeasible)));

        let mut lp = LpProblem::new(ObjSense::Minimize, 2);
        lp.objective = vec![-1.0, 0.0];
        lp.add_row(vec![(0, 1.0), (1, -1.0)], ConstraintSense::Le, 1.0);
        let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_bounded_columns() {
        // min x - y with x free, y <= 3 (no lower), x >= y - 1, x >= -10
        let mut lp = LpProblem::new(ObjSense::Minimize, 2);
        lp.objective = vec![1.0, -1.0];
        lp.lower = vec![f64::NEG_INFINITY, f64::NEG_INFINITY];
        lp.upper = vec![f64::INFINITY, 3.0];
        lp.add_row(vec![(0, 1.0), (1, -1.0)], ConstraintSense::Ge, -1.0);
        lp.add_row(vec![(0, 1.0)], ConstraintSense::Ge, -10.0);
        let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_relative_eq!(s.objective, -1.0, epsilon = 1e-9);
        assert!(lp.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn fixed_variables_and_bound_flips() {
        // max x + y, x in [0, 2], y in [1, 1], x + y <= 10
        let mut lp = LpProblem::new(ObjSense::Maximize, 2);
        lp.objective = vec![1.0, 1.0];
        lp.lower = vec![0.0, 1.0];
        lp.upper = vec![2.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], ConstraintSense::Le, 10.0);
        let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_relative_eq!(s.objective, 3.0);
        assert_relative_eq!(s.duals[0], 0.0);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(ObjSense::Minimize, 2);
        lp.objective = vec![1.0, 2.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], ConstraintSense::Eq, 4.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0)], ConstraintSense::Eq, 8.0);
        let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_relative_eq!(s.objective, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn deterministic_repeat() {
        let mut lp = LpProblem::new(ObjSense::Minimize, 3);
        lp.objective = vec![1.0, 1.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], ConstraintSense::Ge, 1.0);
        lp.add_row(vec![(1, 1.0), (2, 1.0)], ConstraintSense::Ge, 1.0);
        lp.add_row(vec![(0, 1.0), (2, 1.0)], ConstraintSense::Ge, 1.0);
        let a = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        let b = solve_lp(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_relative_eq!(a.objective, 1.5, epsilon = 1e-9);
    }

    /// Brute-force LP oracle for two variables in a box: the optimum sits at a
    /// vertex formed by two active constraints among rows and bounds.
    fn vertex_oracle(lp: &LpProblem) -> Option<f64> {
        let mut lines: Vec<([f64; 2], f64)> = Vec::new();
        for row in &lp.rows {
            let mut a = [0.0; 2];
            for (j, v) in &row.coeffs {
                a[*j] += v;
            }
            lines.push((a, row.rhs));
        }
        for j in 0..2 {
            let mut a = [0.0; 2];
            a[j] = 1.0;
            lines.push((a, lp.lower[j]));
            lines.push((a, lp.upper[j]));
        }
        let mut best: Option<f64> = None;
        for p in 0..lines.len() {
            for q in p + 1..lines.len() {
                let ([a, b], e) = lines[p];
                let ([c, d], f) = lines[q];
                let det = a * d - b * c;
                if det.abs() < 1e-9 {
                    continue;
                }
                let x = [(e * d - b * f) / det, (a * f - e * c) / det];
                if lp.max_violation(&x) < 1e-7 {
                    let v = lp.objective[0] * x[0] + lp.objective[1] * x[1];
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            c in prop::array::uniform2(-5.0f64..5.0),
            rows in prop::collection::vec((prop::array::uniform2(-3.0f64..3.0), -4.0f64..8.0, 0usize..3), 1..5),
        ) {
            let mut lp = LpProblem::new(ObjSense::Minimize, 2);
            lp.objective = c.to_vec();
            lp.lower = vec![-5.0, -5.0];
            lp.upper = vec![5.0, 5.0];
            for (a, b, s) in rows {
                let sense = [ConstraintSense::Le, ConstraintSense::Ge, ConstraintSense::Eq][s];
                lp.add_row(vec![(0, a[0]), (1, a[1])], sense, b);
            }
            let s = solve_lp(&lp, &SimplexOptions::default()).unwrap();
            match vertex_oracle(&lp) {
                Some(v) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert!((s.objective - v).abs() < 1e-6 * (1.0 + v.abs()));
                    prop_assert!(lp.max_violation(&s.x) < 1e-7);
                }
                None => prop_assert_eq!(s.status, LpStatus::Infeasible),
            }
        }

        #[test]
        fn strong_duality_on_random_feasible_lps(
            seed_rows in prop::collection::vec((prop::collection::vec(0.0f64..4.0, 4), 1.0f64..10.0), 1..6),
            c in prop::collection::vec(-3.0f64..3.0, 4),
        ) {
            // max c.x, A x <= b, 0 <= x <= 5 with A >= 0, b > 0: feasible and bounded
            let mut lp = LpProblem::new(ObjSense::Maximize, 4);
            lp.objective = c.clone();
            lp.upper = vec![5.0; 4];
            for (a, b) in &seed_rows {
                lp.add_row(a.iter().copied().enumerate().collect(), ConstraintSense::Le, *b);
            }
            for pricing in [Pricing::Bland, Pricing::DantzigThenBland] {
                let s = solve_lp(&lp, &SimplexOptions { pricing, ..Default::default() }).unwrap();
                prop_assert_eq!(s.status, LpStatus::Optimal);
                // dual objective: b.y + sum_j 5 * max(0, c_j - A_j.y)
                let y = &s.duals;
                prop_assert!(y.iter().all(|v| *v >= -1e-9));
                let mut dual = 0.0;
                for (row, yi) in lp.rows.iter().zip(y) {
                    dual += row.rhs * yi;
                }
                for j in 0..4 {
                    let ay: f64 = lp.rows.iter().zip(y).map(|(r, yi)| {
                        r.coeffs.iter().filter(|(k, _)| *k == j).map(|(_, a)| a * yi).sum::<f64>()
                    }).sum();
                    dual += 5.0 * (c[j] - ay).max(0.0);
                }
                prop_assert!((dual - s.objective).abs() < 1e-7 * (1.0 + s.objective.abs()));
            }
        }
    }
}
