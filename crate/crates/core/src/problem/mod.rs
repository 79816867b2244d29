//! The bilinearly coupled minimax model
//! `min_x max_y f1(x) + f2(x) + y^T B x - g1(y) - g2(y)`.

mod certificate;
mod coupling;
mod oracle;
mod smooth;
pub mod validate;

use nalgebra::DVector;

pub use certificate::{
    certified_pair, dual_residual_certificate, pair_residuals, primal_residual_certificate, Certificate,
    PairResiduals,
};
pub use coupling::Coupling;
pub use oracle::OracleCounts;
pub use smooth::{DualSmooth, QuadraticForm, SmoothOracle, SmoothTerm, StructuredDualSmooth};

use crate::error::{Error, Result};
use crate::prox::ProxTerm;

/// Immutable problem instance. All dimensions are checked once, here.
#[derive(Clone, Debug)]
pub struct MinimaxProblem {
    f1: SmoothTerm,
    f2: ProxTerm,
    coupling: Coupling,
    g1: DualSmooth,
    g2: ProxTerm,
    declared_mu_phi: Option<f64>,
}

impl MinimaxProblem {
    pub fn new(
        f1: SmoothTerm,
        f2: ProxTerm,
        coupling: Coupling,
        g1: DualSmooth,
        g2: ProxTerm,
    ) -> Result<Self> {
        let (dx, dy) = (coupling.dx(), coupling.dy());
        let checks: [(&'static str, usize, usize); 3] = [
            ("f1", dx, f1.dim()),
            ("g1", dy, g1.dim()),
            ("B (rows vs g1)", dy, coupling.dy()),
        ];
        for (oracle, expected, got) in checks {
            if expected != got {
                return Err(Error::DimensionMismatch {
                    oracle,
                    expected,
                    got,
                });
            }
        }
        f2.validate()?;
        g2.validate()?;
        if let Some(d) = f2.fixed_dim().filter(|&d| d != dx) {
            return Err(Error::DimensionMismatch {
                oracle: "f2",
                expected: dx,
                got: d,
            });
        }
        if let Some(d) = g2.fixed_dim().filter(|&d| d != dy) {
            return Err(Error::DimensionMismatch {
                oracle: "g2",
                expected: dy,
                got: d,
            });
        }
        if !(f1.mu() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "f1 must be strongly convex (mu_x = {})",
                f1.mu()
            )));
        }
        Ok(Self {
            f1,
            f2,
            coupling,
            g1,
            g2,
            declared_mu_phi: None,
        })
    }

    /// Attach a user-known strong-convexity modulus of the dual function.
    pub fn with_declared_mu_phi(mut self, mu_phi: f64) -> Result<Self> {
        if !(mu_phi > 0.0 && mu_phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "declared mu_phi must be positive, got {mu_phi}"
            )));
        }
        self.declared_mu_phi = Some(mu_phi);
        Ok(self)
    }

    pub fn f1(&self) -> &SmoothTerm {
        &self.f1
    }

    pub fn f2(&self) -> &ProxTerm {
        &self.f2
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn g1(&self) -> &DualSmooth {
        &self.g1
    }

    pub fn g2(&self) -> &ProxTerm {
        &self.g2
    }

    pub fn declared_mu_phi(&self) -> Option<f64> {
        self.declared_mu_phi
    }

    /// `(d_x, d_y)`
    pub fn dims(&self) -> (usize, usize) {
        (self.coupling.dx(), self.coupling.dy())
    }

    pub fn mu_x(&self) -> f64 {
        self.f1.mu()
    }

    pub fn l_x(&self) -> f64 {
        self.f1.l()
    }

    pub fn l_y(&self) -> f64 {
        self.g1.l()
    }

    pub fn mu_y(&self) -> f64 {
        self.g1.mu()
    }

    /// Smoothness of the dual function: `L_y + sigma_max(B)^2 / mu_x`.
    pub fn l_phi(&self) -> f64 {
        self.l_y() + self.coupling.sigma_max().powi(2) / self.mu_x()
    }

    pub fn default_primal_step(&self) -> f64 {
        1.0 / self.l_x()
    }

    pub fn default_dual_step(&self) -> f64 {
        let l = self.l_y();
        if l > 0.0 {
            1.0 / l
        } else if self.l_phi() > 0.0 {
            1.0 / self.l_phi()
        } else {
            1.0
        }
    }

    /// `L(x, y)` in the extended reals.
    pub fn eval_lagrangian(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let (dx, dy) = self.dims();
        if x.len() != dx {
            return Err(Error::DimensionMismatch {
                oracle: "lagrangian: x",
                expected: dx,
                got: x.len(),
            });
        }
        if y.len() != dy {
            return Err(Error::DimensionMismatch {
                oracle: "lagrangian: y",
                expected: dy,
                got: y.len(),
            });
        }
        let f2 = self.f2.value(x);
        let g2 = self.g2.value(y);
        match (f2 == f64::INFINITY, g2 == f64::INFINITY) {
            (true, true) => Err(Error::BothInfinite),
            (true, false) => Ok(f64::INFINITY),
            (false, true) => Ok(f64::NEG_INFINITY),
            (false, false) => Ok(self.f1.value(x) + f2 + y.dot(&self.coupling.apply(x))
                - self.g1.value(y)
                - g2),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use nalgebra::DMatrix;

    /// f1 = x^2/2, B = [b], g1 = y^2/2 (structured, P = [1]).
    pub(crate) fn scalar_problem(f2: ProxTerm, g2: ProxTerm, b: f64) -> MinimaxProblem {
        let f1 = SmoothTerm::scaled_identity(1.0, DVector::zeros(1)).unwrap();
        let g1 = StructuredDualSmooth::new(None, DMatrix::identity(1, 1), DVector::zeros(1)).unwrap();
        MinimaxProblem::new(
            f1,
            f2,
            Coupling::new(DMatrix::from_element(1, 1, b)),
            DualSmooth::Structured(g1),
            g2,
        )
        .unwrap()
    }

    fn s(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn lagrangian_examples() {
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        assert_eq!(p.eval_lagrangian(&s(0.0), &s(0.0)).unwrap(), 0.0);
        assert_eq!(p.eval_lagrangian(&s(1.0), &s(1.0)).unwrap(), 1.0);

        let boxed = ProxTerm::BoxIndicator { lower: 0.0, upper: 1.0 };
        let p = scalar_problem(boxed.clone(), ProxTerm::Zero, 1.0);
        assert_eq!(p.eval_lagrangian(&s(2.0), &s(0.0)).unwrap(), f64::INFINITY);

        let p = scalar_problem(ProxTerm::Zero, boxed.clone(), 1.0);
        assert_eq!(p.eval_lagrangian(&s(0.0), &s(5.0)).unwrap(), f64::NEG_INFINITY);

        let p = scalar_problem(boxed.clone(), boxed, 1.0);
        assert!(matches!(
            p.eval_lagrangian(&s(2.0), &s(2.0)),
            Err(Error::BothInfinite)
        ));
    }

    #[test]
    fn lagrangian_dimension_error_names_oracle() {
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        match p.eval_lagrangian(&DVector::zeros(3), &s(0.0)) {
            Err(Error::DimensionMismatch { oracle, .. }) => assert!(oracle.contains('x')),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn assembly_checks_dimensions() {
        let f1 = SmoothTerm::scaled_identity(1.0, DVector::zeros(2)).unwrap();
        let g1 = DualSmooth::Structured(StructuredDualSmooth::linear(DVector::zeros(1)));
        let err = MinimaxProblem::new(
            f1.clone(),
            ProxTerm::Zero,
            Coupling::new(DMatrix::zeros(1, 3)),
            g1.clone(),
            ProxTerm::Zero,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { oracle: "f1", .. }));

        let err = MinimaxProblem::new(
            f1,
            ProxTerm::Linear { c: vec![1.0] },
            Coupling::new(DMatrix::zeros(1, 2)),
            g1,
            ProxTerm::Zero,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { oracle: "f2", .. }));
    }

    #[test]
    fn requires_strongly_convex_f1() {
        let err = MinimaxProblem::new(
            SmoothTerm::zero(1),
            ProxTerm::Zero,
            Coupling::new(DMatrix::identity(1, 1)),
            DualSmooth::Structured(StructuredDualSmooth::linear(DVector::zeros(1))),
            ProxTerm::Zero,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn problems_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MinimaxProblem>();
    }
}
