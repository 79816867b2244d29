//! Dense linear-algebra helpers shared by the analysis and generators.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// (lambda_min, lambda_max) of a symmetric matrix.
pub fn sym_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = sym_eigenvalues(m);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// Singular values, descending. Length is min(rows, cols).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with the usual `max(m, n) * eps * sigma_max` cutoff.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    let cutoff = rank_cutoff(m.nrows(), m.ncols(), top);
    sv.iter().filter(|&&s| s > cutoff).count()
}

pub(crate) fn rank_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    (rows.max(cols) as f64) * f64::EPSILON * sigma_max * 16.0
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish orthogonal matrix: QR of a Gaussian matrix with the sign of
/// diag(R) folded into Q so the factor is unique.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Solve a square system by LU; errors if the factorization is singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    a.clone()
        .lu()
        .solve(b)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Symmetric matrix `U diag(d) U^T`.
pub fn with_spectrum(u: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let diag = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    let m = u * diag * u.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn max_abs_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}
