use alloc::vec::Vec;

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::DenseMatrix;

/// A measurement matrix, its observation, and (for synthetic instances) the
/// ground truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x0: Option<Vec<f64>>,
    pub sigma: f64,
    /// Sparsity level of the ℓ0 constraint.
    pub tau: usize,
    pub seed: u64,
}

impl ProblemInstance {
    /// An instance without ground truth, e.g. real measurements.
    pub fn new(a: DenseMatrix, b: Vec<f64>, tau: usize) -> Result<Self> {
        let p = Self { a, b, x0: None, sigma: 0.0, tau, seed: 0 };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn validate(&self) -> Result<()> {
        check_len("observation b", self.a.rows(), self.b.len())?;
        check_finite("observation b", &self.b)?;
        if let Some(x0) = &self.x0 {
            check_len("ground truth x0", self.a.cols(), x0.len())?;
            check_finite("ground truth x0", x0)?;
        }
        if self.tau > self.a.cols() {
            return Err(Error::InvalidInput(alloc::format!("tau = {} exceeds n = {}", self.tau, self.a.cols())));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: self.sigma,
                reason: "noise level must be non-negative",
            });
        }
        Ok(())
    }
}
