//! Best-bound branch and bound over the binary variables of a [`MilpModel`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::simplex::{solve_lp, LpProblem, LpStatus, SimplexOptions};
use crate::error::{Error, Result};
use crate::milp::{MilpModel, VarKind};

/// LP relaxation engine used at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    /// The in-crate dense simplex, re-solved from scratch per node.
    Dense,
    /// Sparse revised simplex from `microlp`, warm-started from the parent.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BnbOptions {
    pub backend: Backend,
    /// Nodes whose bound is within this of the incumbent are pruned.
    pub abs_gap: f64,
    pub int_tol: f64,
    pub node_limit: usize,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            backend: Backend::Sparse,
            abs_gap: 1e-6,
            int_tol: 1e-6,
            node_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    /// Stopped at the node limit; `values` holds the best incumbent, if any.
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MipSolution {
    pub status: MipStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Lower bound proven at termination.
    pub bound: f64,
    pub nodes: usize,
    /// Objective of every incumbent in the order found.
    pub incumbents: Vec<f64>,
}

/// Optimal point of one node relaxation.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Solves node relaxations. `State` carries whatever a child needs to
/// warm-start from its parent.
pub trait RelaxationBackend {
    type State: Clone;
    fn root(&mut self) -> Result<Option<(Self::State, Relaxation)>>;
    /// Relaxation of `parent` with `var` fixed to `value`; `None` if infeasible.
    /// `fixings` lists every fix on the path, including this one.
    fn branch(
        &mut self,
        parent: &Self::State,
        var: usize,
        value: f64,
        fixings: &[(usize, f64)],
    ) -> Result<Option<(Self::State, Relaxation)>>;
}

/// Dense simplex on a copy of the relaxation with bounds tightened.
pub struct DenseBackend {
    lp: LpProblem,
    opts: SimplexOptions,
}

impl DenseBackend {
    pub fn new(model: &MilpModel) -> Result<Self> {
        Ok(DenseBackend {
            lp: LpProblem::from_model(model, true)?,
            opts: SimplexOptions::fast(),
        })
    }

    fn solve_with(&self, fixings: &[(usize, f64)]) -> Result<Option<Relaxation>> {
        let mut lp = self.lp.clone();
        for (v, x) in fixings {
            lp.lower[*v] = *x;
            lp.upper[*v] = *x;
        }
        let sol = solve_lp(&lp, &self.opts)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(Relaxation {
                objective: sol.objective,
                x: sol.x,
            })),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::LpUnbounded),
        }
    }
}

impl RelaxationBackend for DenseBackend {
    type State = ();

    fn root(&mut self) -> Result<Option<((), Relaxation)>> {
        Ok(self.solve_with(&[])?.map(|r| ((), r)))
    }

    fn branch(
        &mut self,
        _: &(),
        _: usize,
        _: f64,
        fixings: &[(usize, f64)],
    ) -> Result<Option<((), Relaxation)>> {
        Ok(self.solve_with(fixings)?.map(|r| ((), r)))
    }
}

/// `microlp` relaxation; children re-solve from the parent's basis.
pub struct SparseBackend {
    problem: microlp::Problem,
    vars: Vec<microlp::Variable>,
    constant: f64,
}

fn backend_err(e: microlp::Error) -> Error {
    Error::Backend(e.to_string())
}

impl SparseBackend {
    pub fn new(model: &MilpModel) -> Result<Self> {
        use microlp::{ComparisonOp, OptimizationDirection, Problem};
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let obj = model.objective();
        let vars: Vec<microlp::Variable> = model
            .variables()
            .iter()
            .zip(obj)
            .map(|(v, c)| problem.add_var(*c, (v.lower, v.upper)))
            .collect();
        for c in model.constraints() {
            let terms: Vec<(microlp::Variable, f64)> =
                c.coeffs.iter().map(|(v, a)| (vars[v.0], *a)).collect();
            let op = match c.sense {
                crate::milp::ConstraintSense::Le => ComparisonOp::Le,
                crate::milp::ConstraintSense::Ge => ComparisonOp::Ge,
                crate::milp::ConstraintSense::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(terms.as_slice(), op, c.rhs);
        }
        Ok(SparseBackend {
            problem,
            vars,
            constant: model.objective_constant,
        })
    }

    fn read(&self, outcome: microlp::SolveOutcome) -> Result<(microlp::Solution, Relaxation)> {
        let sol = outcome
            .into_solution()
            .map_err(|_| Error::Backend("relaxation interrupted".into()))?;
        let x = self.vars.iter().map(|v| sol.var_value_raw(*v)).collect();
        let objective = sol.objective() + self.constant;
        Ok((sol, Relaxation { objective, x }))
    }
}

impl RelaxationBackend for SparseBackend {
    type State = microlp::Solution;

    fn root(&mut self) -> Result<Option<(Self::State, Relaxation)>> {
        match self.problem.solve() {
            Ok(o) => self.read(o).map(Some),
            Err(microlp::Error::Infeasible) => Ok(None),
            Err(microlp::Error::Unbounded) => Err(Error::LpUnbounded),
            Err(e) => Err(backend_err(e)),
        }
    }

    fn branch(
        &mut self,
        parent: &Self::State,
        var: usize,
        value: f64,
        _: &[(usize, f64)],
    ) -> Result<Option<(Self::State, Relaxation)>> {
        match parent.clone().fix_var(self.vars[var], value) {
            Ok(o) => self.read(o).map(Some),
            Err(microlp::Error::Infeasible) => Ok(None),
            Err(e) => Err(backend_err(e)),
        }
    }
}

struct Node<S> {
    bound: f64,
    seq: usize,
    state: S,
    x: Vec<f64>,
    fixings: Vec<(usize, f64)>,
}

impl<S> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S> Eq for Node<S> {}
impl<S> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
// Max-heap: the smallest bound, then the oldest node, comes out first.
impl<S> Ord for Node<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Most fractional binary; ties go to the lowest index.
fn branching_var(binaries: &[usize], x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &v in binaries {
        let f = x[v] - x[v].floor();
        let score = f.min(1.0 - f);
        if score > tol && best.is_none_or(|(_, s)| score > s) {
            best = Some((v, score));
        }
    }
    best.map(|(v, _)| v)
}

/// Minimizes `model` with the given relaxation engine.
pub fn branch_and_bound_with<B: RelaxationBackend>(
    model: &MilpModel,
    backend: &mut B,
    opts: &BnbOptions,
) -> Result<MipSolution> {
    let binaries: Vec<usize> = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(i, _)| i)
        .collect();
    let mut out = MipSolution {
        status: MipStatus::Infeasible,
        values: Vec::new(),
        objective: f64::INFINITY,
        bound: f64::INFINITY,
        nodes: 0,
        incumbents: Vec::new(),
    };
    let Some((state, root)) = backend.root()? else {
        out.nodes = 1;
        return Ok(out);
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bound: root.objective,
        seq,
        state,
        x: root.x,
        fixings: Vec::new(),
    });
    let mut nodes = 1;
    let mut limit_hit = false;
    while let Some(node) = heap.pop() {
        if node.bound >= out.objective - opts.abs_gap {
            // Every remaining node is at least as bad.
            heap.clear();
            break;
        }
        let Some(v) = branching_var(&binaries, &node.x, opts.int_tol) else {
            let mut x = node.x;
            for &b in &binaries {
                x[b] = x[b].round();
            }
            log::debug!("incumbent {:.6} after {nodes} nodes", node.bound);
            out.objective = node.bound;
            out.values = x;
            out.incumbents.push(node.bound);
            continue;
        };
        if nodes + 2 > opts.node_limit {
            heap.push(node);
            limit_hit = true;
            break;
        }
        for value in [0.0, 1.0] {
            let mut fixings = node.fixings.clone();
            fixings.push((v, value));
            nodes += 1;
            if let Some((state, r)) = backend.branch(&node.state, v, value, &fixings)? {
                seq += 1;
                if r.objective < out.objective - opts.abs_gap {
                    heap.push(Node {
                        bound: r.objective.max(node.bound),
                        seq,
                        state,
                        x: r.x,
                        fixings,
                    });
                }
            }
        }
    }
    out.nodes = nodes;
    let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    out.bound = open.min(out.objective);
    out.status = if limit_hit {
        MipStatus::NodeLimit
    } else if out.objective.is_finite() {
        out.bound = out.objective;
        MipStatus::Optimal
    } else {
        MipStatus::Infeasible
    };
    if limit_hit && !out.objective.is_finite() {
        out.bound = open;
    }
    Ok(out)
}

/// Branch and bound: most-fractional branching, best-bound node selection,
/// ties broken by creation order.
pub fn branch_and_bound(model: &MilpModel, opts: &BnbOptions) -> Result<MipSolution> {
    match opts.backend {
        Backend::Dense => branch_and_bound_with(model, &mut DenseBackend::new(model)?, opts),
        Backend::Sparse => branch_and_bound_with(model, &mut SparseBackend::new(model)?, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::ConstraintSense;

    fn knapsack() -> MilpModel {
        // max 5a + 4b + 3c  s.t.  2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut m = MilpModel::new("knap");
        let v: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|n| m.add_binary(*n).unwrap())
            .collect();
        for (x, c) in v.iter().zip([5.0, 4.0, 3.0]) {
            m.add_objective(*x, -c);
        }
        for (row, rhs) in [
            ([2.0, 3.0, 1.0], 5.0),
            ([4.0, 1.0, 2.0], 11.0),
            ([3.0, 4.0, 2.0], 8.0),
        ] {
            m.add_constraint(
                format!("r{rhs}"),
                v.iter().copied().zip(row),
                ConstraintSense::Le,
                rhs,
            )
            .unwrap();
        }
        m
    }

    fn brute(m: &MilpModel) -> f64 {
        let n = m.num_vars();
        (0..1u32 << n)
            .map(|mask| {
                (0..n)
                    .map(|i| f64::from((mask >> i) & 1))
                    .collect::<Vec<_>>()
            })
            .filter(|x| m.max_violation(x) <= 1e-9)
            .map(|x| m.objective_value(&x))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn knapsack_matches_brute_force_on_both_backends() {
        let m = knapsack();
        for backend in [Backend::Dense, Backend::Sparse] {
            let s = branch_and_bound(
                &m,
                &BnbOptions {
                    backend,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(s.status, MipStatus::Optimal);
            assert!((s.objective - brute(&m)).abs() < 1e-9);
            assert!(m.max_violation(&s.values) < 1e-7);
            assert!(s.bound <= s.objective + 1e-9);
            assert!(s.incumbents.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn infeasible_model_reports_status() {
        let mut m = MilpModel::new("inf");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint("half", [(a, 1.0), (b, 1.0)], ConstraintSense::Eq, 1.5)
            .unwrap();
        for backend in [Backend::Dense, Backend::Sparse] {
            let s = branch_and_bound(
                &m,
                &BnbOptions {
                    backend,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(s.status, MipStatus::Infeasible);
        }
    }

    #[test]
    fn fixed_binaries_reduce_to_the_lp() {
        let mut m = knapsack();
        for i in 0..3 {
            m.set_bounds(
                crate::milp::VarId(i),
                1.0 - (i % 2) as f64,
                1.0 - (i % 2) as f64,
            );
        }
        let s = branch_and_bound(&m, &BnbOptions::default()).unwrap();
        let lp = solve_lp(
            &LpProblem::from_model(&m, true).unwrap(),
            &SimplexOptions::default(),
        )
        .unwrap();
        assert_eq!(s.nodes, 1);
        assert!((s.objective - lp.objective).abs() < 1e-9);
    }

    #[test]
    fn node_limit_is_reported() {
        let m = knapsack();
        let s = branch_and_bound(
            &m,
            &BnbOptions {
                node_limit: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.status, MipStatus::NodeLimit);
    }
}
