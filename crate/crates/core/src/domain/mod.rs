//! Value types shared by every module.

mod approx;
mod dimension;
mod matrix;
mod problem;

pub use approx::{ApproxFunction, Components, PowerLog, Table};
pub use dimension::{DimensionFunction, Limit, ShiftedCheck};
pub use matrix::FormMatrix;
pub use problem::{classify_regime, IntegerVector, ProblemSpec, Regime, SolutionRecord, Variant};
