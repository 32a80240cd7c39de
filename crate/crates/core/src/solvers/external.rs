//! Optional cross-check against scipy's HiGHS MILP solver, run as a
//! `python3` subprocess. The model travels as JSON on stdin.

use std::io::Write;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{ConstraintSense, MilpModel, VarKind};

const SCRIPT: &str = r#"
import json, sys
import numpy as np
from scipy.optimize import milp, LinearConstraint, Bounds
from scipy.sparse import coo_matrix
m = json.load(sys.stdin)
n = len(m["c"])
rows, cols, vals = zip(*m["a"]) if m["a"] else ((), (), ())
A = coo_matrix((vals, (rows, cols)), shape=(len(m["lb"]), n)).tocsr()
inf = lambda v: np.inf if v is None else v
ninf = lambda v: -np.inf if v is None else v
cons = [LinearConstraint(A, [ninf(v) for v in m["lb"]], [inf(v) for v in m["ub"]])] if m["lb"] else []
res = milp(np.array(m["c"]), constraints=cons, integrality=np.array(m["int"]),
           bounds=Bounds([ninf(v) for v in m["xl"]], [inf(v) for v in m["xu"]]),
           options={"mip_rel_gap": 1e-9})
out = {"status": int(res.status), "message": str(res.message)}
if res.x is not None:
    out["objective"] = float(res.fun) + m["k"]
    out["x"] = [float(v) for v in res.x]
json.dump(out, sys.stdout)
"#;

#[derive(Serialize)]
struct Payload {
    c: Vec<f64>,
    k: f64,
    a: Vec<(usize, usize, f64)>,
    lb: Vec<Option<f64>>,
    ub: Vec<Option<f64>>,
    xl: Vec<Option<f64>>,
    xu: Vec<Option<f64>>,
    int: Vec<u8>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExternalSolution {
    /// scipy status code, 0 when optimal.
    pub status: i32,
    pub message: String,
    pub objective: Option<f64>,
    pub x: Option<Vec<f64>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn payload(m: &MilpModel) -> Payload {
    let mut a = Vec::new();
    let (mut lb, mut ub) = (Vec::new(), Vec::new());
    for (r, c) in m.constraints().iter().enumerate() {
        a.extend(c.coeffs.iter().map(|(v, x)| (r, v.0, *x)));
        let (l, u) = match c.sense {
            ConstraintSense::Le => (None, Some(c.rhs)),
            ConstraintSense::Ge => (Some(c.rhs), None),
            ConstraintSense::Eq => (Some(c.rhs), Some(c.rhs)),
        };
        lb.push(l);
        ub.push(u);
    }
    let vars = m.variables();
    Payload {
        c: m.objective().to_vec(),
        k: m.objective_constant,
        a,
        lb,
        ub,
        xl: vars.iter().map(|v| finite(v.lower)).collect(),
        xu: vars.iter().map(|v| finite(v.upper)).collect(),
        int: vars
            .iter()
            .map(|v| u8::from(v.kind == VarKind::Binary))
            .collect(),
    }
}

/// Whether `python3` can import scipy's MILP interface.
pub fn scipy_available() -> bool {
    Command::new("python3")
        .args(["-c", "from scipy.optimize import milp"])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

/// Solves `m` with scipy. Errors when the interpreter or scipy is missing.
pub fn solve_with_scipy(m: &MilpModel) -> Result<ExternalSolution> {
    let input = serde_json::to_vec(&payload(m))?;
    let mut child = Command::new("python3")
        .args(["-c", SCRIPT])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::External(format!("cannot start python3: {e}")))?;
    child
        .stdin
        .take()
        .expect("stdin is piped")
        .write_all(&input)?;
    let out = child.wait_with_output()?;
    if !out.status.success() {
        return Err(Error::External(
            String::from_utf8_lossy(&out.stderr).trim().to_string(),
        ));
    }
    Ok(serde_json::from_slice(&out.stdout)?)
}
