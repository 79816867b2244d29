//! Inexact dual accelerated proximal gradient.
//!
//! Accelerated proximal gradient on the dual `Phi(y) = phi(y) + g2(y)`, where
//! `grad phi(z) = grad g1(z) - B x*(z)` is replaced by an inexact `x^{k+1}`
//! from a warm-started APG solve of `min_x f1(x) + f2(x) + <B^T z, x>`. The
//! inner solve stops once its certified distance is at most
//! `eps_{k+1} / sigma_max(B)`, with `eps_k^2` shrinking geometrically.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::apg::{apg_minimize, CompositeObjective};
use crate::error::{Error, Result};
use crate::problem::{primal_residual_certificate, MinimaxProblem, OracleCounts};
use crate::stopping::{all_finite, check_start, counted_residuals, Reference, StoppingRule};
use crate::trace::{RunStatus, Trace, TraceMeta, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualConstants {
    pub l_phi: f64,
    pub mu_phi: f64,
    /// `L_phi / mu_phi`; `None` when `mu_phi = 0`.
    pub kappa_phi: Option<f64>,
}

impl DualConstants {
    /// `L_phi = L_y + sigma_max(B)^2 / mu_x` with the supplied `mu_phi`.
    pub fn new(problem: &MinimaxProblem, mu_phi: f64) -> Result<Self> {
        Self::from_parts(problem.l_phi(), mu_phi)
    }

    pub fn from_parts(l_phi: f64, mu_phi: f64) -> Result<Self> {
        if !(l_phi > 0.0 && l_phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("L_phi must be positive, got {l_phi}")));
        }
        if !(mu_phi >= 0.0 && mu_phi <= l_phi * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "mu_phi must lie in [0, L_phi = {l_phi}], got {mu_phi}"
            )));
        }
        let mu_phi = mu_phi.min(l_phi);
        Ok(Self {
            l_phi,
            mu_phi,
            kappa_phi: (mu_phi > 0.0).then(|| l_phi / mu_phi),
        })
    }
}

pub const DEFAULT_C: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSchedule {
    pub epsilon1: f64,
    pub theta: f64,
    /// Constant the schedule was derived from, if any.
    pub c: Option<f64>,
}

impl ToleranceSchedule {
    pub fn new(epsilon1: f64, theta: f64) -> Result<Self> {
        if !(epsilon1 > 0.0 && epsilon1.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon1 must be positive, got {epsilon1}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta must be in (0, 1), got {theta}")));
        }
        Ok(Self {
            epsilon1,
            theta,
            c: None,
        })
    }

    /// `eps_k = eps_1 theta^((k-1)/2)` for `k >= 1`.
    pub fn epsilon(&self, k: usize) -> f64 {
        assert!(k >= 1, "schedule is indexed from 1");
        self.epsilon1 * self.theta.powf((k - 1) as f64 / 2.0)
    }
}

/// `(sqrt(kappa_phi) - 1) / (sqrt(kappa_phi) + 1)` when `mu_phi > 0`, else
/// `k / (k + 3)`.
pub fn momentum_beta(k: usize, constants: &DualConstants) -> f64 {
    match constants.kappa_phi {
        Some(kappa) => {
            let s = kappa.sqrt();
            (s - 1.0) / (s + 1.0)
        }
        None => k as f64 / (k as f64 + 3.0),
    }
}

/// `theta = 1 - 1/(c sqrt(kappa_phi))` and
/// `eps_1 = (sqrt(theta) - sqrt(1 - 1/sqrt(kappa_phi))) sqrt(mu_phi gap)`.
pub fn theorem3_schedule(constants: &DualConstants, c: f64, phi_gap_bound: f64) -> Result<ToleranceSchedule> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must exceed 1, got {c}")));
    }
    let kappa = constants
        .kappa_phi
        .ok_or_else(|| Error::InvalidParameter("schedule needs mu_phi > 0".into()))?;
    if !(phi_gap_bound > 0.0 && phi_gap_bound.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dual gap bound must be positive and finite, got {phi_gap_bound}"
        )));
    }
    let sk = kappa.sqrt();
    let theta = 1.0 - 1.0 / (c * sk);
    let epsilon1 = (theta.sqrt() - (1.0 - 1.0 / sk).sqrt()) * (constants.mu_phi * phi_gap_bound).sqrt();
    if !(epsilon1 > 0.0 && epsilon1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon1 = {epsilon1} is not positive (c too close to 1?)"
        )));
    }
    Ok(ToleranceSchedule {
        epsilon1,
        theta,
        c: Some(c),
    })
}

fn inner_objective<'a>(problem: &'a MinimaxProblem, shift: &'a DVector<f64>) -> Result<CompositeObjective<'a>> {
    CompositeObjective::new(problem.f1(), problem.f2())?.with_shift(shift)
}

/// Upper bound `C >= Phi(y0) - Phi(y*)`.
///
/// `x_tilde` approximates `x*(y0)` to certified accuracy `inner_tol`; then
/// `dist(0, dPhi(y0)) <= dist(0, grad g1(y0) - B x_hat + dg2(y0))
/// + sigma_max(B) ||x_hat - x*(y0)||` with `x_hat` the certified point, and
/// strong convexity gives `Phi(y0) - Phi* <= dist(0, dPhi(y0))^2 / (2 mu_phi)`.
pub fn epsilon1_gap_bound(
    problem: &MinimaxProblem,
    y0: &DVector<f64>,
    constants: &DualConstants,
    inner_tol: f64,
) -> Result<f64> {
    if !(constants.mu_phi > 0.0) {
        return Err(Error::InvalidParameter("gap bound needs mu_phi > 0".into()));
    }
    let (dx, _) = problem.dims();
    let shift = problem.coupling().apply_t(y0);
    let obj = inner_objective(problem, &shift)?;
    let x_tilde = apg_minimize(&obj, &DVector::zeros(dx), inner_tol, 1_000_000)?.x;
    let cert = primal_residual_certificate(problem, &x_tilde, y0, problem.default_primal_step())?;
    let v = problem.g1().gradient(y0) - problem.coupling().apply(&cert.point);
    let dual = problem.g2().subgradient_distance(y0, &v);
    let primal = problem.coupling().sigma_max() * cert.bound / problem.mu_x();
    Ok((dual + primal).powi(2) / (2.0 * constants.mu_phi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdapgState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub y_prev: DVector<f64>,
    pub z: DVector<f64>,
    pub k: usize,
}

impl IdapgState {
    /// `z^0 = y^0`.
    pub fn new(x0: DVector<f64>, y0: DVector<f64>) -> Self {
        Self {
            x: x0,
            y_prev: y0.clone(),
            z: y0.clone(),
            y: y0,
            k: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IdapgStepInfo {
    pub inner_iters: usize,
    /// Certified bound on `||x^{k+1} - x*(z^k)||`.
    pub inner_distance: f64,
    /// Inner oracle calls spent on certificates.
    pub inner_cert_counts: OracleCounts,
}

/// Round-off floor for the inner target: below it the certificate cannot
/// be resolved in double precision.
fn inner_floor(problem: &MinimaxProblem, x: &DVector<f64>, shift: &DVector<f64>) -> f64 {
    let kappa_x = problem.l_x() / problem.mu_x();
    64.0 * f64::EPSILON * kappa_x * x.norm().max(shift.norm() / problem.l_x()).max(1.0)
}

/// One outer iteration with inner accuracy `epsilon`.
pub fn idapg_step(
    problem: &MinimaxProblem,
    state: &IdapgState,
    constants: &DualConstants,
    epsilon: f64,
    inner_max_iters: usize,
) -> Result<(IdapgState, IdapgStepInfo)> {
    let (dx, dy) = problem.dims();
    if state.x.len() != dx || state.z.len() != dy || state.y.len() != dy {
        return Err(Error::DimensionMismatch {
            oracle: "idapg state",
            expected: dx + dy,
            got: state.x.len() + state.z.len(),
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("inner accuracy must be positive, got {epsilon}")));
    }
    let sigma = problem.coupling().sigma_max();
    let shift = problem.coupling().apply_t(&state.z);
    let target = if sigma > 0.0 { epsilon / sigma } else { f64::INFINITY };
    let target = target.max(inner_floor(problem, &state.x, &shift));
    let obj = inner_objective(problem, &shift)?;
    let inner = apg_minimize(&obj, &state.x, target, inner_max_iters)?;

    let l_phi = constants.l_phi;
    let grad = problem.g1().gradient(&state.z) - problem.coupling().apply(&inner.x);
    let y = problem.g2().prox(1.0 / l_phi, &(&state.z - grad / l_phi));
    let beta = momentum_beta(state.k, constants);
    let z = &y + (&y - &state.y) * beta;
    let info = IdapgStepInfo {
        inner_iters: inner.iterations,
        inner_distance: inner.certified_distance,
        inner_cert_counts: OracleCounts {
            grad_f1: inner.counts.cert_grad,
            prox_f2: inner.counts.cert_prox,
            ..Default::default()
        },
    };
    Ok((
        IdapgState {
            x: inner.x,
            y_prev: state.y.clone(),
            y,
            z,
            k: state.k + 1,
        },
        info,
    ))
}

/// Outer loop. Record `k` holds `x^k`, `y^k`, the accuracy `eps_k` used to
/// produce them and the inner iterations spent.
pub fn idapg_run(
    problem: &MinimaxProblem,
    constants: &DualConstants,
    schedule: &ToleranceSchedule,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    stop: &StoppingRule,
    reference: Option<Reference<'_>>,
) -> Result<Trace> {
    stop.validate()?;
    check_start(problem, x0, y0)?;
    let mut trace = Trace::new(TraceMeta {
        algo: "idapg".into(),
        config: serde_json::to_value(schedule).unwrap_or_default(),
        instance_hash: None,
        constants: serde_json::to_value(constants).ok(),
    });
    let mut counts = OracleCounts::default();
    let mut cert_counts = OracleCounts::default();
    let mut state = IdapgState::new(x0.clone(), y0.clone());
    let mut last: Option<(f64, usize)> = None;
    let mut image;
    loop {
        let (x_hat, y_hat, res) = counted_residuals(problem, &state.x, &state.y, &mut cert_counts)?;
        image = (x_hat, y_hat);
        let mut rec = TraceRecord {
            k: state.k,
            eps_k: last.map(|l| l.0),
            inner_iters: Some(last.map_or(0, |l| l.1)),
            primal_cert: res.primal,
            dual_cert: res.dual,
            ..Default::default()
        };
        if let Some(r) = reference {
            let (dx2, dy2) = r.distances(&state.x, &state.y);
            rec.dist_x_sq = Some(dx2);
            rec.dist_y_sq = Some(dy2);
        }
        trace.records.push(rec);
        let done = stop.met(&res);
        if done || state.k >= stop.max_iters {
            trace.status = if done {
                RunStatus::Converged
            } else {
                RunStatus::MaxIterations
            };
            break;
        }
        let eps = schedule.epsilon(state.k + 1);
        let (next, info) = idapg_step(problem, &state, constants, eps, stop.inner_max_iters)?;
        if !all_finite(&next.x) || !all_finite(&next.y) || !all_finite(&next.z) {
            return Err(Error::Diverged {
                iteration: next.k,
                last_x: state.x,
                last_y: state.y,
            });
        }
        let it = info.inner_iters as u64;
        counts.grad_f1 += it;
        counts.prox_f2 += it;
        counts.grad_g1 += 1;
        counts.prox_g2 += 1;
        counts.apply_b += 1;
        counts.apply_bt += 1;
        cert_counts.add(&info.inner_cert_counts);
        last = Some((eps, info.inner_iters));
        state = next;
    }
    trace.counts = counts;
    trace.certificate_counts = cert_counts;
    // the reported point is the one the last residual certifies
    trace.final_x = image.0.as_slice().to_vec();
    trace.final_y = image.1.as_slice().to_vec();
    Ok(trace)
}
