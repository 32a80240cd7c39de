//! LP and MILP kernels.

pub mod bnb;
pub mod enumerate;
pub mod external;
pub mod plan;
pub mod simplex;

pub use bnb::{branch_and_bound, Backend, BnbOptions, MipSolution, MipStatus};
pub use enumerate::{enumerate_oracle, enumerate_sp, Enumerated};
pub use plan::{
    build_formulation, solve_plan, BoundsRecipe, Method, Plan, PlanOptions, SolverChoice,
};
pub use simplex::{simplex_solve, solve_lp, LpProblem, LpSolution, LpStatus};
