//! Termination rule and reference-point bookkeeping shared by the solvers.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{certified_pair, MinimaxProblem, OracleCounts, PairResiduals};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub max_iters: usize,
    /// Stop once both residual certificates are at most this; `None` runs
    /// the full `max_iters`.
    pub tol: Option<f64>,
    /// Iteration ceiling of each inner solve (iDAPG only).
    pub inner_max_iters: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol: Some(1e-10),
            inner_max_iters: 1_000_000,
        }
    }
}

impl StoppingRule {
    pub fn iterations(max_iters: usize) -> Self {
        Self {
            max_iters,
            tol: None,
            ..Self::default()
        }
    }

    pub fn with_tol(max_iters: usize, tol: f64) -> Self {
        Self {
            max_iters,
            tol: Some(tol),
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub(crate) fn met(&self, r: &PairResiduals) -> bool {
        self.tol.is_some_and(|t| r.max() <= t)
    }
}

/// A known saddle point, used only for instrumentation.
#[derive(Clone, Copy, Debug)]
pub struct Reference<'a> {
    pub x: &'a DVector<f64>,
    pub y: &'a DVector<f64>,
}

impl Reference<'_> {
    pub fn distances(&self, x: &DVector<f64>, y: &DVector<f64>) -> (f64, f64) {
        ((x - self.x).norm_squared(), (y - self.y).norm_squared())
    }
}

/// Certified image of `(x, y)` and its residuals, tallying the oracle calls
/// spent.
pub(crate) fn counted_residuals(
    problem: &MinimaxProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
    counts: &mut OracleCounts,
) -> Result<(DVector<f64>, DVector<f64>, PairResiduals)> {
    let r = certified_pair(problem, x, y)?;
    counts.grad_f1 += 2;
    counts.prox_f2 += 1;
    counts.apply_bt += 2;
    counts.grad_g1 += 2;
    counts.prox_g2 += 1;
    counts.apply_b += 1;
    Ok(r)
}

pub(crate) fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|a| a.is_finite())
}

pub(crate) fn check_start(problem: &MinimaxProblem, x0: &DVector<f64>, y0: &DVector<f64>) -> Result<()> {
    let (dx, dy) = problem.dims();
    if x0.len() != dx {
        return Err(Error::DimensionMismatch {
            oracle: "x0",
            expected: dx,
            got: x0.len(),
        });
    }
    if y0.len() != dy {
        return Err(Error::DimensionMismatch {
            oracle: "y0",
            expected: dy,
            got: y0.len(),
        });
    }
    if !all_finite(x0) || !all_finite(y0) {
        return Err(Error::InvalidParameter("starting point is not finite".into()));
    }
    Ok(())
}
