//! Prox-gradient residual certificates.
//!
//! For the x-block, one prox-gradient step from `x` at step `t` produces
//! `x_hat` together with the subgradient `(x - x_hat)/t - (grad f1(x) + B^T z)`
//! of `f2` at `x_hat`. Adding `grad f1(x_hat) + B^T z` gives an element of
//! `d_x L(x_hat, z)` whose norm is the returned bound; strong convexity then
//! gives `||x_hat - x*(z)|| <= bound / mu_x`. The y-block mirrors this on
//! `g1 + g2 - B x`.

use nalgebra::DVector;

use super::MinimaxProblem;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub point: DVector<f64>,
    pub bound: f64,
}

fn check_dim(oracle: &'static str, expected: usize, v: &DVector<f64>) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            oracle,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

fn check_step(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("certificate step must be positive, got {t}")));
    }
    Ok(())
}

/// Certificate for the x-block at dual point `z` from primal point `x`.
pub fn primal_residual_certificate(
    problem: &MinimaxProblem,
    x: &DVector<f64>,
    z: &DVector<f64>,
    t: f64,
) -> Result<Certificate> {
    let (dx, dy) = problem.dims();
    check_dim("primal certificate: x", dx, x)?;
    check_dim("primal certificate: z", dy, z)?;
    check_step(t)?;
    let shift = problem.coupling().apply_t(z);
    Ok(primal_certificate_with_shift(problem, x, &shift, t))
}

/// Same as [`primal_residual_certificate`] with `B^T z` precomputed.
fn primal_certificate_with_shift(
    problem: &MinimaxProblem,
    x: &DVector<f64>,
    shift: &DVector<f64>,
    t: f64,
) -> Certificate {
    let f1 = problem.f1();
    let grad_x = f1.gradient(x);
    let x_hat = problem.f2().prox(t, &(x - (&grad_x + shift) * t));
    let grad_hat = f1.gradient(&x_hat);
    let bound = (grad_hat - grad_x + (x - &x_hat) / t).norm();
    Certificate { point: x_hat, bound }
}

/// Certificate for the y-block at primal point `x_tilde` from dual point `y`.
pub fn dual_residual_certificate(
    problem: &MinimaxProblem,
    x_tilde: &DVector<f64>,
    y: &DVector<f64>,
    t: f64,
) -> Result<Certificate> {
    let (dx, dy) = problem.dims();
    check_dim("dual certificate: x_tilde", dx, x_tilde)?;
    check_dim("dual certificate: y", dy, y)?;
    check_step(t)?;
    let g1 = problem.g1();
    let bx = problem.coupling().apply(x_tilde);
    let grad_y = g1.gradient(y);
    let y_hat = problem.g2().prox(t, &(y - (&grad_y - &bx) * t));
    let grad_hat = g1.gradient(&y_hat);
    let bound = (grad_hat - grad_y + (y - &y_hat) / t).norm();
    Ok(Certificate { point: y_hat, bound })
}

/// KKT residuals of the certified point `(x_hat, y_hat)`: `x_hat` is the
/// prox-gradient image of `x` at `y`, `y_hat` that of `y` at `x_hat`. Both are
/// norms of explicit elements of `d_x L(x_hat, y_hat)` and
/// `d_y (-L)(x_hat, y_hat)`, so they vanish exactly at saddle points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairResiduals {
    pub primal: f64,
    pub dual: f64,
}

impl PairResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual)
    }
}

pub fn pair_residuals(
    problem: &MinimaxProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<PairResiduals> {
    Ok(certified_pair(problem, x, y)?.2)
}

/// `(x_hat, y_hat)` together with their KKT residuals.
pub fn certified_pair(
    problem: &MinimaxProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, PairResiduals)> {
    let (dx, dy) = problem.dims();
    check_dim("residuals: x", dx, x)?;
    check_dim("residuals: y", dy, y)?;
    let t = problem.default_primal_step();
    let f1 = problem.f1();
    let grad_x = f1.gradient(x);
    let x_hat = problem
        .f2()
        .prox(t, &(x - (&grad_x + problem.coupling().apply_t(y)) * t));
    let dual = dual_residual_certificate(problem, &x_hat, y, problem.default_dual_step())?;
    let e = f1.gradient(&x_hat) - grad_x
        + (x - &x_hat) / t
        + problem.coupling().apply_t(&(&dual.point - y));
    let r = PairResiduals {
        primal: e.norm(),
        dual: dual.bound,
    };
    Ok((x_hat, dual.point, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::tests::scalar_problem;
    use crate::prox::ProxTerm;

    fn s(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn primal_closed_form_minimizer() {
        // f1 = x^2/2, B = 1, z = 1: x*(1) = -1
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        let c = primal_residual_certificate(&p, &s(0.0), &s(1.0), 1.0).unwrap();
        assert_eq!(c.point, s(-1.0));
        assert_eq!(c.bound, 0.0);
    }

    #[test]
    fn primal_fixed_point_has_zero_bound() {
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        let c = primal_residual_certificate(&p, &s(-0.3), &s(0.3), 0.25).unwrap();
        assert!(c.bound < 1e-15);
    }

    #[test]
    fn primal_with_l1() {
        // brute force: argmin u^2/2 + |u| on a grid is 0
        let grid = (0..=20_000)
            .map(|i| -1.0 + i as f64 * 1e-4)
            .min_by(|a, b| (0.5 * a * a + a.abs()).total_cmp(&(0.5 * b * b + b.abs())))
            .unwrap();
        assert!(grid.abs() < 1e-4);
        let p = scalar_problem(ProxTerm::L1 { weight: 1.0 }, ProxTerm::Zero, 1.0);
        let c = primal_residual_certificate(&p, &s(3.0), &s(0.0), 1.0).unwrap();
        assert_eq!(c.point, s(0.0));
        assert_eq!(c.bound, 0.0);
    }

    #[test]
    fn dual_examples() {
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        let c = dual_residual_certificate(&p, &s(0.0), &s(0.0), 1.0).unwrap();
        assert_eq!((c.point[0], c.bound), (0.0, 0.0));
        let c = dual_residual_certificate(&p, &s(-1.0), &s(1.0), 1.0).unwrap();
        assert_eq!(c.point, s(-1.0));
        assert_eq!(c.bound, 0.0);

        let point = ProxTerm::BoxIndicator { lower: 0.0, upper: 0.0 };
        let p = scalar_problem(ProxTerm::Zero, point, 1.0);
        for y in [-4.0, 0.5, 12.0] {
            let c = dual_residual_certificate(&p, &s(1.0), &s(y), 0.7).unwrap();
            assert_eq!(c.point, s(0.0));
        }
    }

    #[test]
    fn pair_residuals_vanish_only_at_the_saddle() {
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        let r = pair_residuals(&p, &s(0.0), &s(0.0)).unwrap();
        assert_eq!(r.max(), 0.0);
        // (0, 1): x_hat = -1 is the best response to y = 1, but y is not optimal
        let r = pair_residuals(&p, &s(0.0), &s(1.0)).unwrap();
        assert_eq!(r.primal, 2.0);
        // x = -1 with y = 0: x_hat = 0 = x*(0) and y_hat = 0
        let r = pair_residuals(&p, &s(-1.0), &s(0.0)).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn dimension_and_step_errors() {
        let p = scalar_problem(ProxTerm::Zero, ProxTerm::Zero, 1.0);
        let two = DVector::zeros(2);
        assert!(matches!(
            primal_residual_certificate(&p, &two, &s(0.0), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(dual_residual_certificate(&p, &s(0.0), &two, 1.0).is_err());
        assert!(primal_residual_certificate(&p, &s(0.0), &s(0.0), 0.0).is_err());
    }
}
