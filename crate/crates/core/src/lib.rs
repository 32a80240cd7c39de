//! Facility location under decision-dependent demand ambiguity.
//!
//! Demand moments at each customer shift with the set of open facilities; the
//! first-stage plan minimizes opening cost plus the worst-case expected
//! transport/penalty cost over all finite-support distributions whose moments
//! stay inside a window around those decision-dependent values.

pub mod ambiguity;
pub mod benchmarks;
pub mod error;
pub mod experiment;
pub mod inner;
pub mod milp;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{DemandModel, Instance, LocationDecision, ProblemData, Support};
