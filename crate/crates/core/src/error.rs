use serde::Serialize;
use thiserror::Error;

/// Every failure the library reports. Numeric failures carry enough context
/// to be printed as a JSON diagnostic by the command line tool.
#[derive(Debug, Clone, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum Error {
    #[error("root iteration did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("all coefficients vanish")]
    AllCoefficientsZero,
    #[error("dominant coefficient is zero")]
    ZeroDominant,
    #[error("no cluster split with separation ratio above {gap_factor}")]
    NoSplit { gap_factor: f64 },
    #[error("split Jacobian is singular")]
    SingularJacobian,
    #[error("insufficient data: need {needed} samples, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("function does not vanish at support boundary {point}")]
    NonvanishingBoundary { point: f64 },
    #[error("interpolation matrix is singular (condition {cond:e})")]
    SingularMatrix { cond: f64 },
    #[error("derivative order {order} outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("sign change near t = {witness}")]
    SignChange { witness: f64 },
    #[error("base point {t} outside the admissible set")]
    OutsideDomain { t: f64 },
    #[error("budget exceeds the whole interval at base point {t}")]
    BudgetExhausted { t: f64 },
    #[error("chain did not terminate after {count} intervals")]
    NonterminatingChain { count: usize },
    #[error("refinement ceiling reached near t = {t}")]
    RefinementCeiling { t: f64 },
    #[error("nontrivial monodromy around cell ({i}, {j}): {permutation:?}")]
    MonodromyObstruction {
        i: usize,
        j: usize,
        permutation: Vec<usize>,
    },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("recursion depth {depth} exceeded")]
    DepthExceeded { depth: usize },
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
