use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid approximating function: {0}")]
    InvalidApproxFunction(String),

    #[error("invalid dimension function: {0}")]
    InvalidDimensionFunction(String),

    #[error("height {r} outside tabulated range 1..={len}")]
    TableRange { r: u64, len: usize },

    #[error("height must be at least 1")]
    ZeroHeight,

    #[error("per-coordinate approximating function has no single value; evaluate a component")]
    NotScalar,

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid height window [{q_min}, {q_max}]")]
    InvalidWindow { q_min: u64, q_max: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing dimension function for a Hausdorff series")]
    MissingDimensionFunction,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("top n x n block is singular")]
    SingularTopBlock,

    #[error("matrix outside A(epsilon, N): {condition}")]
    MembershipViolation { condition: String },

    #[error("r fails the scaled classical inequality at coordinate {coordinate}: distance {distance} exceeds {bound}")]
    EqOneViolation {
        coordinate: usize,
        distance: String,
        bound: String,
    },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("scan budget exceeded: estimated {estimate} form evaluations, budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidApproxFunction(_) => "InvalidApproxFunction",
            Error::InvalidDimensionFunction(_) => "InvalidDimensionFunction",
            Error::TableRange { .. } => "TableRange",
            Error::ZeroHeight => "ZeroHeight",
            Error::NotScalar => "NotScalar",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidProblem(_) => "InvalidProblem",
            Error::InvalidWindow { .. } => "InvalidWindow",
            Error::Parse(_) => "Parse",
            Error::MissingDimensionFunction => "MissingDimensionFunction",
            Error::Hypothesis(_) => "Hypothesis",
            Error::SingularTopBlock => "SingularTopBlock",
            Error::MembershipViolation { .. } => "MembershipViolation",
            Error::EqOneViolation { .. } => "EqOneViolation",
            Error::Regime(_) => "Regime",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidPlan(_) => "InvalidPlan",
            Error::Certificate(_) => "Certificate",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
