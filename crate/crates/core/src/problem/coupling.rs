use nalgebra::{DMatrix, DVector};

use crate::linalg;

/// Coupling matrix `B` (d_y x d_x) with its singular values cached at
/// construction.
#[derive(Clone, Debug)]
pub struct Coupling {
    matrix: DMatrix<f64>,
    sigma_max: f64,
    sigma_min: f64,
    sigma_min_nz: f64,
}

impl Coupling {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let (dy, dx) = matrix.shape();
        let sv = linalg::singular_values(&matrix);
        let sigma_max = sv.first().copied().unwrap_or(0.0);
        let cutoff = linalg::rank_cutoff(dy, dx, sigma_max);
        // smallest singular value of B as a map onto R^{d_y}: zero whenever
        // the row count exceeds the column count
        let sigma_min = if dy > dx {
            0.0
        } else {
            sv.last().copied().unwrap_or(0.0)
        };
        let sigma_min = if sigma_min <= cutoff { 0.0 } else { sigma_min };
        let sigma_min_nz = sv
            .iter()
            .rev()
            .copied()
            .find(|&s| s > cutoff)
            .unwrap_or(0.0);
        Self {
            matrix,
            sigma_max,
            sigma_min,
            sigma_min_nz,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dx(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dy(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_min_nz(&self) -> f64 {
        self.sigma_min_nz
    }

    pub fn has_full_row_rank(&self) -> bool {
        self.sigma_min > 0.0
    }

    /// `B x`
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `B^T y`
    pub fn apply_t(&self, y: &DVector<f64>) -> DVector<f64> {
        self.matrix.tr_mul(y)
    }

    /// `B B^T`
    pub fn gram_rows(&self) -> DMatrix<f64> {
        &self.matrix * self.matrix.transpose()
    }
}
