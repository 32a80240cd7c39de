use crate::ambiguity::RaySlack;
use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown customer index {0}")]
    UnknownCustomer(usize),

    #[error("unknown facility index {0}")]
    UnknownFacility(usize),

    #[error("negative demand {0}")]
    NegativeDemand(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("model validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("ambiguity set empty for customer {customer}: {}", format_rays(.violated))]
    AmbiguityInfeasible {
        customer: usize,
        violated: Vec<RaySlack>,
    },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("LP backend failure: {0}")]
    Backend(String),

    #[error("MILP model error: {0}")]
    Model(String),

    #[error("enumeration over {0} facilities exceeds the supported limit")]
    TooManyFacilities(usize),

    #[error("external solver: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn format_rays(v: &[RaySlack]) -> String {
    if v.is_empty() {
        return "moment window lies outside the support hull (no extreme-ray inequality violated)"
            .to_string();
    }
    v.iter()
        .map(|r| format!("ray {} slack {:.6e}", r.ray + 1, r.slack))
        .collect::<Vec<_>>()
        .join(", ")
}
