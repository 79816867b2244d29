use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Value and gradient access to a smooth convex function.
///
/// Implementations must be safe to call from several threads at once.
pub trait SmoothOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// `0.5 x^T H x + l^T x`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
}

impl QuadraticForm {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.hessian * x + &self.linear
    }
}

#[derive(Clone)]
enum SmoothKind {
    Quadratic(QuadraticForm),
    Custom(Arc<dyn SmoothOracle>),
}

/// A smooth convex term with known strong-convexity modulus `mu` and
/// smoothness modulus `l`.
#[derive(Clone)]
pub struct SmoothTerm {
    kind: SmoothKind,
    dim: usize,
    mu: f64,
    l: f64,
}

impl fmt::Debug for SmoothTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            SmoothKind::Quadratic(_) => "quadratic",
            SmoothKind::Custom(_) => "custom",
        };
        f.debug_struct("SmoothTerm")
            .field("kind", &kind)
            .field("dim", &self.dim)
            .field("mu", &self.mu)
            .field("l", &self.l)
            .finish()
    }
}

/// Eigenvalues below this fraction of the spectral scale are treated as zero.
pub(crate) const PSD_REL_TOL: f64 = 1e-10;

pub(crate) fn clamp_modulus(lmin: f64, lmax: f64) -> f64 {
    if lmin <= PSD_REL_TOL * lmax.abs().max(1.0) {
        0.0
    } else {
        lmin
    }
}

impl SmoothTerm {
    /// Quadratic term; moduli are read off the Hessian spectrum.
    pub fn quadratic(hessian: DMatrix<f64>, linear: DVector<f64>) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n {
            return Err(Error::DimensionMismatch {
                oracle: "quadratic hessian (columns)",
                expected: n,
                got: hessian.ncols(),
            });
        }
        if linear.len() != n {
            return Err(Error::DimensionMismatch {
                oracle: "quadratic linear term",
                expected: n,
                got: linear.len(),
            });
        }
        let asym = linalg::max_abs_asymmetry(&hessian);
        if asym > 1e-12 * hessian.amax().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "quadratic hessian not symmetric (max asymmetry {asym:e})"
            )));
        }
        let (lmin, lmax) = linalg::sym_extremes(&hessian);
        if lmin < -PSD_REL_TOL * lmax.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "quadratic hessian not positive semidefinite (lambda_min {lmin:e})"
            )));
        }
        let mu = clamp_modulus(lmin, lmax);
        let l = lmax.max(mu).max(0.0);
        Ok(Self {
            kind: SmoothKind::Quadratic(QuadraticForm { hessian, linear }),
            dim: n,
            mu,
            l,
        })
    }

    /// `0.5 * w * ||x||^2 + l^T x`.
    pub fn scaled_identity(weight: f64, linear: DVector<f64>) -> Result<Self> {
        let n = linear.len();
        Self::quadratic(DMatrix::identity(n, n) * weight, linear)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            kind: SmoothKind::Quadratic(QuadraticForm {
                hessian: DMatrix::zeros(dim, dim),
                linear: DVector::zeros(dim),
            }),
            dim,
            mu: 0.0,
            l: 0.0,
        }
    }

    /// Arbitrary oracle with caller-declared moduli.
    pub fn custom(oracle: Arc<dyn SmoothOracle>, mu: f64, l: f64) -> Result<Self> {
        if !(mu >= 0.0 && l >= mu && l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smooth term moduli must satisfy 0 <= mu <= L < inf (mu={mu}, L={l})"
            )));
        }
        Ok(Self {
            dim: oracle.dim(),
            kind: SmoothKind::Custom(oracle),
            mu,
            l,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticForm> {
        match &self.kind {
            SmoothKind::Quadratic(q) => Some(q),
            SmoothKind::Custom(_) => None,
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            SmoothKind::Quadratic(q) => q.value(x),
            SmoothKind::Custom(o) => o.value(x),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            SmoothKind::Quadratic(q) => q.gradient(x),
            SmoothKind::Custom(o) => o.gradient(x),
        }
    }
}

/// Smooth dual term of the form `g3(y) + 0.5 y^T P y + b^T y`.
#[derive(Clone, Debug)]
pub struct StructuredDualSmooth {
    g3: Option<SmoothTerm>,
    p: DMatrix<f64>,
    b: DVector<f64>,
    lambda_max_p: f64,
    lambda_min_p: f64,
    declared_linear: bool,
}

impl StructuredDualSmooth {
    pub fn new(g3: Option<SmoothTerm>, p: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = b.len();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                oracle: "structured g1: P",
                expected: n,
                got: if p.nrows() != n { p.nrows() } else { p.ncols() },
            });
        }
        if let Some(g) = &g3 {
            if g.dim() != n {
                return Err(Error::DimensionMismatch {
                    oracle: "structured g1: g3",
                    expected: n,
                    got: g.dim(),
                });
            }
        }
        let asym = linalg::max_abs_asymmetry(&p);
        if asym > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "P not symmetric (max asymmetry {asym:e})"
            )));
        }
        let (lmin, lmax) = linalg::sym_extremes(&p);
        if lmin < -1e-10 {
            return Err(Error::InvalidParameter(format!(
                "P not positive semidefinite (lambda_min {lmin:e})"
            )));
        }
        Ok(Self {
            g3,
            p,
            b,
            lambda_max_p: lmax.max(0.0),
            lambda_min_p: clamp_modulus(lmin, lmax),
            declared_linear: false,
        })
    }

    /// `g1(y) = b^T y`; the only constructor that marks the term linear.
    pub fn linear(b: DVector<f64>) -> Self {
        let n = b.len();
        Self {
            g3: None,
            p: DMatrix::zeros(n, n),
            b,
            lambda_max_p: 0.0,
            lambda_min_p: 0.0,
            declared_linear: true,
        }
    }

    pub fn g3(&self) -> Option<&SmoothTerm> {
        self.g3.as_ref()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn lambda_max_p(&self) -> f64 {
        self.lambda_max_p
    }

    pub fn lambda_min_p(&self) -> f64 {
        self.lambda_min_p
    }

    pub fn is_declared_linear(&self) -> bool {
        self.declared_linear
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn value(&self, y: &DVector<f64>) -> f64 {
        let g3 = self.g3.as_ref().map_or(0.0, |g| g.value(y));
        g3 + 0.5 * y.dot(&(&self.p * y)) + self.b.dot(y)
    }

    pub fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.p * y + &self.b;
        if let Some(g3) = &self.g3 {
            g += g3.gradient(y);
        }
        g
    }

    pub fn l(&self) -> f64 {
        self.g3.as_ref().map_or(0.0, SmoothTerm::l) + self.lambda_max_p
    }

    pub fn mu(&self) -> f64 {
        self.g3.as_ref().map_or(0.0, SmoothTerm::mu) + self.lambda_min_p
    }
}

/// The smooth dual term `g1`, either opaque or in structured form.
#[derive(Clone, Debug)]
pub enum DualSmooth {
    Generic(SmoothTerm),
    Structured(StructuredDualSmooth),
}

impl DualSmooth {
    pub fn dim(&self) -> usize {
        match self {
            DualSmooth::Generic(t) => t.dim(),
            DualSmooth::Structured(s) => s.dim(),
        }
    }

    pub fn value(&self, y: &DVector<f64>) -> f64 {
        match self {
            DualSmooth::Generic(t) => t.value(y),
            DualSmooth::Structured(s) => s.value(y),
        }
    }

    pub fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            DualSmooth::Generic(t) => t.gradient(y),
            DualSmooth::Structured(s) => s.gradient(y),
        }
    }

    pub fn l(&self) -> f64 {
        match self {
            DualSmooth::Generic(t) => t.l(),
            DualSmooth::Structured(s) => s.l(),
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            DualSmooth::Generic(t) => t.mu(),
            DualSmooth::Structured(s) => s.mu(),
        }
    }

    pub fn as_structured(&self) -> Option<&StructuredDualSmooth> {
        match self {
            DualSmooth::Structured(s) => Some(s),
            DualSmooth::Generic(_) => None,
        }
    }

    pub fn is_declared_linear(&self) -> bool {
        matches!(self, DualSmooth::Structured(s) if s.is_declared_linear())
    }

    /// Hessian when g1 is quadratic (structured with quadratic or absent g3,
    /// or a generic quadratic term).
    pub fn quadratic_hessian(&self) -> Option<DMatrix<f64>> {
        match self {
            DualSmooth::Generic(t) => t.as_quadratic().map(|q| q.hessian.clone()),
            DualSmooth::Structured(s) => match s.g3() {
                None => Some(s.p().clone()),
                Some(g3) => g3.as_quadratic().map(|q| &q.hessian + s.p()),
            },
        }
    }
}
