//! Reference saddle points: KKT solves for smooth quadratic instances, long
//! certified iDAPG runs otherwise.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::{classify_case, mu_phi_lower_bound, CaseLabel};
use crate::error::{Error, Result};
use crate::idapg::{epsilon1_gap_bound, idapg_run, theorem3_schedule, DualConstants, DEFAULT_C};
use crate::linalg;
use crate::problem::{certified_pair, pair_residuals, MinimaxProblem};
use crate::stopping::{Reference, StoppingRule};

/// Largest accepted residual certificate.
pub const REFERENCE_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    KktSolve,
    HighAccuracyRun,
    /// Read from an instance file; kept as given.
    Supplied,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSaddle {
    pub x_star: DVector<f64>,
    pub y_star: DVector<f64>,
    pub method: ReferenceMethod,
    /// Largest KKT residual at `(x_star, y_star)`.
    pub certificate: f64,
}

impl ReferenceSaddle {
    pub fn as_reference(&self) -> Reference<'_> {
        Reference {
            x: &self.x_star,
            y: &self.y_star,
        }
    }

    /// A point from outside (e.g. an instance file), with its residual
    /// recorded but not enforced.
    pub fn supplied(problem: &MinimaxProblem, x: DVector<f64>, y: DVector<f64>) -> Result<Self> {
        let certificate = pair_residuals(problem, &x, &y)?.max();
        Ok(Self {
            x_star: x,
            y_star: y,
            method: ReferenceMethod::Supplied,
            certificate,
        })
    }

    pub(crate) fn accept(problem: &MinimaxProblem, x: DVector<f64>, y: DVector<f64>, method: ReferenceMethod) -> Result<Self> {
        // keep the certified image of the candidate, whose residual is known
        let (x, y, r) = certified_pair(problem, &x, &y)?;
        let certificate = r.max();
        if !(certificate <= REFERENCE_TOL) {
            return Err(Error::ReferenceRejected(certificate));
        }
        Ok(Self {
            x_star: x,
            y_star: y,
            method,
            certificate,
        })
    }
}

/// `[Q B^T; B -H] [x; y] = [-q; c]` where `f1 = x'Qx/2 + q'x` and
/// `grad g1(y) = H y + c`. Rank-deficient systems (linear `g1` with
/// rank-deficient `B`) get the minimum-norm solution, which puts `y` in
/// `Range(B)`.
pub fn reference_from_kkt(problem: &MinimaxProblem) -> Result<ReferenceSaddle> {
    if !problem.f2().is_zero() || !problem.g2().is_zero() {
        return Err(Error::NotQuadratic("KKT reference needs f2 = g2 = 0".into()));
    }
    let f1 = problem
        .f1()
        .as_quadratic()
        .ok_or_else(|| Error::NotQuadratic("f1 is not quadratic".into()))?;
    let h = problem
        .g1()
        .quadratic_hessian()
        .ok_or_else(|| Error::NotQuadratic("g1 is not quadratic".into()))?;
    let (dx, dy) = problem.dims();
    let c = problem.g1().gradient(&DVector::zeros(dy));
    let b = problem.coupling().matrix();
    let n = dx + dy;
    let mut k = DMatrix::zeros(n, n);
    k.view_mut((0, 0), (dx, dx)).copy_from(&f1.hessian);
    k.view_mut((0, dx), (dx, dy)).copy_from(&b.transpose());
    k.view_mut((dx, 0), (dy, dx)).copy_from(b);
    k.view_mut((dx, dx), (dy, dy)).copy_from(&(-&h));
    let mut rhs = DVector::zeros(n);
    rhs.rows_mut(0, dx).copy_from(&(-&f1.linear));
    rhs.rows_mut(dx, dy).copy_from(&c);

    let svd = k.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = linalg::rank_cutoff(n, n, smax);
    let mut sol = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::Singular(format!("KKT system: {e}")))?;
    // one refinement step
    let r = &rhs - &k * &sol;
    if let Ok(d) = svd.solve(&r, cutoff) {
        sol += d;
    }
    let x = sol.rows(0, dx).into_owned();
    let y = sol.rows(dx, dy).into_owned();
    ReferenceSaddle::accept(problem, x, y, ReferenceMethod::KktSolve)
}

/// Target certificate and iteration ceiling of high-accuracy runs.
pub const HIGH_ACCURACY_TOL: f64 = 1e-12;
pub const HIGH_ACCURACY_MAX_ITERS: usize = 1_000_000;

/// Long iDAPG run with the certified dual modulus of the instance's case.
pub fn reference_from_run(problem: &MinimaxProblem) -> Result<ReferenceSaddle> {
    let case = classify_case(problem);
    if case == CaseLabel::Uncertified {
        return Err(Error::Uncertified("no dual strong-convexity modulus for a reference run".into()));
    }
    let mu_phi = mu_phi_lower_bound(problem, case)?;
    let constants = DualConstants::new(problem, mu_phi)?;
    let (dx, dy) = problem.dims();
    let x0 = problem.f2().prox(1.0, &DVector::zeros(dx));
    let y0 = problem.g2().prox(1.0, &DVector::zeros(dy));
    let gap = epsilon1_gap_bound(problem, &y0, &constants, HIGH_ACCURACY_TOL)?;
    let schedule = theorem3_schedule(&constants, DEFAULT_C, gap.max(1e-300))?;
    let stop = StoppingRule::with_tol(HIGH_ACCURACY_MAX_ITERS, HIGH_ACCURACY_TOL);
    let trace = idapg_run(problem, &constants, &schedule, &x0, &y0, &stop, None)?;
    ReferenceSaddle::accept(problem, trace.final_x(), trace.final_y(), ReferenceMethod::HighAccuracyRun)
}

/// KKT solve when the instance is smooth and quadratic, long run otherwise.
pub fn reference_saddle(problem: &MinimaxProblem) -> Result<ReferenceSaddle> {
    let smooth_quadratic = problem.f2().is_zero()
        && problem.g2().is_zero()
        && problem.f1().as_quadratic().is_some()
        && problem.g1().quadratic_hessian().is_some();
    if smooth_quadratic {
        reference_from_kkt(problem)
    } else {
        reference_from_run(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Coupling, DualSmooth, SmoothTerm, StructuredDualSmooth};
    use crate::prox::ProxTerm;

    fn s(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    fn scalar(q: f64, f2: ProxTerm) -> MinimaxProblem {
        MinimaxProblem::new(
            SmoothTerm::quadratic(DMatrix::identity(1, 1), s(q)).unwrap(),
            f2,
            Coupling::new(DMatrix::identity(1, 1)),
            DualSmooth::Structured(StructuredDualSmooth::new(None, DMatrix::identity(1, 1), s(0.0)).unwrap()),
            ProxTerm::Zero,
        )
        .unwrap()
    }

    #[test]
    fn kkt_hand_example() {
        // x - 1 + y = 0, x - y = 0
        let r = reference_from_kkt(&scalar(-1.0, ProxTerm::Zero)).unwrap();
        assert!((r.x_star[0] - 0.5).abs() < 1e-15 && (r.y_star[0] - 0.5).abs() < 1e-15);
        assert_eq!(r.method, ReferenceMethod::KktSolve);
        let r = reference_from_kkt(&scalar(0.0, ProxTerm::Zero)).unwrap();
        assert_eq!((r.x_star[0], r.y_star[0]), (0.0, 0.0));
    }

    #[test]
    fn run_matches_soft_threshold_solution() {
        // x + 0.5 sign(x) - 1 + y = 0 and y = x give x = y = 0.25
        let p = scalar(-1.0, ProxTerm::L1 { weight: 0.5 });
        let r = reference_saddle(&p).unwrap();
        assert_eq!(r.method, ReferenceMethod::HighAccuracyRun);
        assert!((r.x_star[0] - 0.25).abs() < 1e-11);
        assert!((r.y_star[0] - 0.25).abs() < 1e-11);
        assert!(r.certificate <= REFERENCE_TOL);
    }

    #[test]
    fn minimum_norm_dual_for_linear_g1() {
        // B = diag(1, 0), g1 linear: y2 is free, the reference takes y2 = 0
        let p = MinimaxProblem::new(
            SmoothTerm::quadratic(DMatrix::identity(2, 2), DVector::from_vec(vec![-1.0, 2.0])).unwrap(),
            ProxTerm::Zero,
            Coupling::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))),
            DualSmooth::Structured(StructuredDualSmooth::linear(DVector::from_vec(vec![0.5, 0.0]))),
            ProxTerm::Zero,
        )
        .unwrap();
        let r = reference_from_kkt(&p).unwrap();
        assert!((r.x_star - DVector::from_vec(vec![0.5, -2.0])).norm() < 1e-14);
        assert!((r.y_star - DVector::from_vec(vec![0.5, 0.0])).norm() < 1e-14);
    }
}
