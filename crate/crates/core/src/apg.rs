//! Accelerated proximal gradient for `min_x s(x) + <c, x> + h(x)` with `s`
//! strongly convex and smooth.
//!
//! Step size is `1/L` and the momentum is the constant
//! `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`. The first two steps carry no
//! momentum (the `theta_0 = 1` start), which gives
//! `F(x_k) - F* <= (1 - 1/sqrt(kappa))^(k-1) * (L/2) * ||x_0 - x*||^2` for
//! every `k >= 1`, also when `h` is nonsmooth.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::SmoothTerm;
use crate::prox::ProxTerm;

#[derive(Clone, Copy, Debug)]
pub struct CompositeObjective<'a> {
    smooth: &'a SmoothTerm,
    shift: Option<&'a DVector<f64>>,
    prox: &'a ProxTerm,
    mu: f64,
    l: f64,
}

impl<'a> CompositeObjective<'a> {
    pub fn new(smooth: &'a SmoothTerm, prox: &'a ProxTerm) -> Result<Self> {
        let (mu, l) = (smooth.mu(), smooth.l());
        if !(mu > 0.0) || l < mu {
            return Err(Error::InvalidParameter(format!(
                "composite objective needs 0 < mu <= L (mu={mu}, L={l})"
            )));
        }
        Ok(Self {
            smooth,
            shift: None,
            prox,
            mu,
            l,
        })
    }

    /// Adds the linear term `<c, x>` to the smooth part.
    pub fn with_shift(mut self, c: &'a DVector<f64>) -> Result<Self> {
        if c.len() != self.smooth.dim() {
            return Err(Error::DimensionMismatch {
                oracle: "composite objective: linear term",
                expected: self.smooth.dim(),
                got: c.len(),
            });
        }
        self.shift = Some(c);
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn smooth_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let g = self.smooth.gradient(x);
        match self.shift {
            Some(c) => g + c,
            None => g,
        }
    }

    /// Full objective value (extended real).
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let lin = self.shift.map_or(0.0, |c| c.dot(x));
        self.smooth.value(x) + lin + self.prox.value(x)
    }

    fn prox_step(&self, y: &DVector<f64>, grad: &DVector<f64>) -> DVector<f64> {
        let t = 1.0 / self.l;
        self.prox.prox(t, &(y - grad * t))
    }

    pub fn momentum(&self) -> f64 {
        let s = self.kappa().sqrt();
        (s - 1.0) / (s + 1.0)
    }
}

/// Raw iterate sequence, without termination logic.
#[derive(Clone, Debug)]
pub struct ApgIterates<'a> {
    obj: CompositeObjective<'a>,
    x: DVector<f64>,
    x_prev: DVector<f64>,
    steps: usize,
}

impl<'a> ApgIterates<'a> {
    pub fn new(obj: CompositeObjective<'a>, x0: DVector<f64>) -> Self {
        Self {
            obj,
            x_prev: x0.clone(),
            x: x0,
            steps: 0,
        }
    }

    pub fn current(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Extrapolated point for the next step.
    fn anchor(&self) -> DVector<f64> {
        if self.steps >= 2 {
            &self.x + (&self.x - &self.x_prev) * self.obj.momentum()
        } else {
            self.x.clone()
        }
    }

    /// Advance one step; returns the prox-gradient residual bound of the new
    /// iterate (`||grad s(x+) - grad s(y) + L (y - x+)||`).
    pub fn step(&mut self) -> f64 {
        let y = self.anchor();
        let g = self.obj.smooth_gradient(&y);
        let x_new = self.obj.prox_step(&y, &g);
        let g_new = self.obj.smooth_gradient(&x_new);
        let bound = (g_new - g + (&y - &x_new) * self.obj.l).norm();
        self.x_prev = std::mem::replace(&mut self.x, x_new);
        self.steps += 1;
        bound
    }
}

/// A-oracle tallies of one inner solve. `step_*` are the calls the method
/// itself needs (one of each per iteration); `cert_*` are the extra calls
/// spent on certificates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ApgCounts {
    pub step_grad: u64,
    pub step_prox: u64,
    pub cert_grad: u64,
    pub cert_prox: u64,
}

#[derive(Clone, Debug)]
pub struct ApgResult {
    pub x: DVector<f64>,
    /// Upper bound on `||x - argmin||`.
    pub certified_distance: f64,
    pub iterations: usize,
    pub counts: ApgCounts,
}

/// Run APG from `x0` until the certified distance to the minimizer is at most
/// `target_distance`.
///
/// The warm start is returned unchanged (zero iterations) when
/// `||x0 - x_hat|| + bound / mu` already meets the target, `x_hat` being the
/// prox-gradient image of `x0`.
pub fn apg_minimize(
    obj: &CompositeObjective<'_>,
    x0: &DVector<f64>,
    target_distance: f64,
    max_iters: usize,
) -> Result<ApgResult> {
    if !(target_distance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target distance must be positive, got {target_distance}"
        )));
    }
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            oracle: "apg: x0",
            expected: obj.dim(),
            got: x0.len(),
        });
    }
    let mu = obj.mu();
    let mut iter = ApgIterates::new(*obj, x0.clone());
    let mut counts = ApgCounts::default();

    // first step doubles as the warm-start check
    let bound = iter.step();
    let dist_hat = bound / mu;
    let warm = (x0 - iter.current()).norm() + dist_hat;
    if warm <= target_distance {
        counts.cert_grad = 2;
        counts.cert_prox = 1;
        return Ok(ApgResult {
            x: x0.clone(),
            certified_distance: warm,
            iterations: 0,
            counts,
        });
    }
    counts.step_grad += 1;
    counts.step_prox += 1;
    counts.cert_grad += 1;
    let mut dist = dist_hat;
    loop {
        if !dist.is_finite() || iter.current().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iteration: iter.steps(),
                last_x: x0.clone(),
                last_y: DVector::zeros(0),
            });
        }
        if dist <= target_distance {
            return Ok(ApgResult {
                x: iter.current().clone(),
                certified_distance: dist,
                iterations: iter.steps(),
                counts,
            });
        }
        if iter.steps() >= max_iters {
            return Err(Error::MaxIterations {
                iterations: iter.steps(),
                best: iter.current().clone(),
                certified_distance: dist,
            });
        }
        dist = iter.step() / mu;
        counts.step_grad += 1;
        counts.step_prox += 1;
        counts.cert_grad += 1;
    }
}

/// A-priori iteration count for APG to reach `target` from `initial`:
/// `ceil(sqrt(kappa) * ln(kappa * initial^2 / target^2)) + 1`, floored at 1.
pub fn apg_iteration_bound(kappa: f64, initial_distance: f64, target_distance: f64) -> Result<usize> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa must be >= 1, got {kappa}")));
    }
    if !(initial_distance > 0.0 && target_distance > 0.0) {
        return Err(Error::InvalidParameter("distances must be positive".into()));
    }
    let arg = kappa * (initial_distance / target_distance).powi(2);
    let n = kappa.sqrt() * arg.ln();
    Ok(if n > 0.0 { n.ceil() as usize + 1 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn s(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn unit_condition_number_solves_in_one_step() {
        // s(x) = (x - 3)^2 / 2
        let f = SmoothTerm::scaled_identity(1.0, s(-3.0)).unwrap();
        let obj = CompositeObjective::new(&f, &ProxTerm::Zero).unwrap();
        let r = apg_minimize(&obj, &s(0.0), 1e-12, 10).unwrap();
        assert_eq!(r.x, s(3.0));
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn linear_shift_minimizer() {
        // F(x) = x^2/2 + x, argmin -1
        let f = SmoothTerm::scaled_identity(1.0, s(0.0)).unwrap();
        let c = s(1.0);
        let obj = CompositeObjective::new(&f, &ProxTerm::Zero).unwrap().with_shift(&c).unwrap();
        let r = apg_minimize(&obj, &s(0.0), 1e-8, 100).unwrap();
        assert!((r.x[0] + 1.0).abs() <= 1e-8);
    }

    #[test]
    fn l1_minimizer_at_zero() {
        // brute force on a grid: argmin u^2/2 + |u| is 0
        let grid = (0..=10_000)
            .map(|i| -5.0 + i as f64 * 1e-3)
            .min_by(|a, b| (0.5 * a * a + a.abs()).total_cmp(&(0.5 * b * b + b.abs())))
            .unwrap();
        assert!(grid.abs() < 1e-9);
        let f = SmoothTerm::scaled_identity(1.0, s(0.0)).unwrap();
        let h = ProxTerm::L1 { weight: 1.0 };
        let obj = CompositeObjective::new(&f, &h).unwrap();
        let r = apg_minimize(&obj, &s(5.0), 1e-8, 100).unwrap();
        assert!(r.x[0].abs() <= 1e-8);
    }

    #[test]
    fn warm_start_at_optimum_takes_zero_iterations() {
        let f = SmoothTerm::quadratic(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 10.0])),
            DVector::from_vec(vec![-1.0, 2.0]),
        )
        .unwrap();
        let obj = CompositeObjective::new(&f, &ProxTerm::Zero).unwrap();
        let opt = DVector::from_vec(vec![1.0, -0.2]);
        let r = apg_minimize(&obj, &opt, 1e-6, 100).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.x, opt);
        assert_eq!((r.counts.step_grad, r.counts.step_prox), (0, 0));
    }

    #[test]
    fn step_counts_equal_iterations() {
        let f = SmoothTerm::quadratic(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 30.0])),
            DVector::from_vec(vec![-1.0, 2.0]),
        )
        .unwrap();
        let obj = CompositeObjective::new(&f, &ProxTerm::L1 { weight: 0.1 }).unwrap();
        let r = apg_minimize(&obj, &DVector::from_vec(vec![5.0, 5.0]), 1e-9, 1000).unwrap();
        assert!(r.iterations > 1);
        assert_eq!(r.counts.step_grad, r.iterations as u64);
        assert_eq!(r.counts.step_prox, r.iterations as u64);
    }

    #[test]
    fn max_iters_error_carries_best_iterate() {
        let f = SmoothTerm::quadratic(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1000.0])),
            DVector::from_vec(vec![-1.0, 2.0]),
        )
        .unwrap();
        let obj = CompositeObjective::new(&f, &ProxTerm::Zero).unwrap();
        match apg_minimize(&obj, &DVector::from_vec(vec![50.0, 50.0]), 1e-12, 3) {
            Err(Error::MaxIterations { iterations, best, certified_distance }) => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), 2);
                assert!(certified_distance > 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iteration_bound_examples() {
        assert_eq!(apg_iteration_bound(1.0, 1.0, 2.0).unwrap(), 1);
        assert_eq!(apg_iteration_bound(4.0, 1.0, 0.1).unwrap(), 13);
        assert_eq!(apg_iteration_bound(100.0, 1.0, 1e-4).unwrap(), 232);
        assert!(apg_iteration_bound(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = SmoothTerm::scaled_identity(1.0, s(0.0)).unwrap();
        let obj = CompositeObjective::new(&f, &ProxTerm::Zero).unwrap();
        assert!(apg_minimize(&obj, &s(0.0), 0.0, 10).is_err());
        assert!(apg_minimize(&obj, &DVector::zeros(2), 1.0, 10).is_err());
        let flat = SmoothTerm::zero(1);
        assert!(CompositeObjective::new(&flat, &ProxTerm::Zero).is_err());
    }
}
