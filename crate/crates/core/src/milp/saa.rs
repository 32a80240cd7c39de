//! Sample-average model with the location binaries as decisions.

use super::{ConstraintSense, Formulation, MilpModel, VarId};
use crate::benchmarks::ScenarioSet;
use crate::error::{Error, Result};
use crate::model::Instance;

/// `min f.y + sum_w p_w (sum_ij c_ij x_ij + sum_j p_j s_j - sum_j r_j d_j)`
/// subject to demand balance and `x_ij <= C_i y_i` in every scenario.
pub fn build_sp_saa(
    instance: &Instance,
    scenarios: &ScenarioSet,
    budget: Option<usize>,
) -> Result<Formulation> {
    let (ni, nj) = (instance.num_facilities(), instance.num_customers());
    if scenarios.num_customers() != nj {
        return Err(Error::Dimension(format!(
            "scenarios cover {} customers, instance has {nj}",
            scenarios.num_customers()
        )));
    }
    let fid = |i: usize| instance.facilities[i].id;
    let cid = |j: usize| instance.customers[j].id;
    let mut m = MilpModel::new("sp");
    let y: Vec<VarId> = (0..ni)
        .map(|i| m.add_binary(format!("y_{}", fid(i))))
        .collect::<Result<_>>()?;
    for (i, v) in y.iter().enumerate() {
        m.add_objective(*v, instance.facilities[i].open_cost);
    }
    for (w, (d, p)) in scenarios
        .demands
        .iter()
        .zip(&scenarios.probabilities)
        .enumerate()
    {
        let w = w + 1;
        for j in 0..nj {
            let cu = &instance.customers[j];
            let mut bal = Vec::with_capacity(ni + 1);
            for i in 0..ni {
                let x =
                    m.add_continuous(format!("x_{w}_{}_{}", fid(i), cid(j)), 0.0, f64::INFINITY)?;
                m.add_objective(x, p * instance.c(i, j));
                m.add_constraint(
                    format!("cap_{w}_{}_{}", fid(i), cid(j)),
                    [(x, 1.0), (y[i], -instance.facilities[i].capacity)],
                    ConstraintSense::Le,
                    0.0,
                )?;
                bal.push((x, 1.0));
            }
            let s = m.add_continuous(format!("s_{w}_{}", cid(j)), 0.0, f64::INFINITY)?;
            m.add_objective(s, p * cu.penalty);
            bal.push((s, 1.0));
            m.add_constraint(
                format!("bal_{w}_{}", cid(j)),
                bal,
                ConstraintSense::Eq,
                d[j],
            )?;
            m.objective_constant -= p * cu.revenue * d[j];
        }
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
        duals: None,
        bounds: None,
    })
}
