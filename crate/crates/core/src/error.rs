use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::solvers::{GridPoint, IterationTrace};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone)]
pub enum Error {
    /// Vector or matrix sizes disagree.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// A NaN or infinity showed up where finite data is required.
    NonFinite(&'static str),
    /// A penalty or solver parameter is outside its domain.
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    /// Structurally invalid input, e.g. `tau > m`.
    InvalidInput(String),
    /// The Cholesky factorization hit a non-positive pivot.
    Factorization {
        rho: f64,
        pivot_index: usize,
        pivot: f64,
        /// Ratio of largest to smallest diagonal entry of the factored matrix.
        diagonal_ratio: f64,
    },
    /// An iterate went non-finite or exceeded the divergence guard.
    Diverged { iteration: usize, trace: Box<IterationTrace> },
    /// Every lambda on the selection grid diverged.
    GridExhausted(Vec<GridPoint>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, found {found}")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidParameter { name, value, reason } => {
                write!(f, "invalid parameter {name} = {value}: {reason}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Factorization { rho, pivot_index, pivot, diagonal_ratio } => write!(
                f,
                "factorization failed at pivot {pivot_index} (value {pivot:e}) with rho = {rho}, \
                 diagonal ratio {diagonal_ratio:e}"
            ),
            Error::Diverged { iteration, trace } => {
                write!(f, "solver diverged at iteration {iteration} ({} trace records kept)", trace.len())
            }
            Error::GridExhausted(points) => {
                write!(f, "all {} lambda grid runs diverged", points.len())
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
