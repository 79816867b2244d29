//! Primal-dual proximal gradient:
//!
//! ```text
//! x+ = prox_{alpha f2}(x - alpha (grad f1(x) + B^T y))
//! y+ = prox_{beta g2}(y - beta (grad g1(y) - B (x+ + theta (x+ - x))))
//! ```
//!
//! With `theta = 0`, `alpha < 1/L_x` and `beta <= mu_x / (sigma_max(B)^2 +
//! mu_x lambda_max(P))` the weighted distance
//! `V = c_x ||x - x*||^2 + c_y ||y - y*||^2` contracts by `delta` per step.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::analysis::check_assumption2;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{MinimaxProblem, OracleCounts, StructuredDualSmooth};
use crate::stopping::{all_finite, check_start, counted_residuals, Reference, StoppingRule};
use crate::trace::{RunStatus, Trace, TraceMeta, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdpgConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub theta_extrap: f64,
}

impl PdpgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step sizes must be positive (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        if !(self.theta_extrap >= 0.0 && self.theta_extrap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "extrapolation weight must be nonnegative, got {}",
                self.theta_extrap
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdpgRate {
    pub c_x: f64,
    pub c_y: f64,
    pub delta: f64,
}

impl PdpgRate {
    pub fn lyapunov(&self, dist_x_sq: f64, dist_y_sq: f64) -> f64 {
        self.c_x * dist_x_sq + self.c_y * dist_y_sq
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdpgState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub k: usize,
}

impl PdpgState {
    pub fn new(x: DVector<f64>, y: DVector<f64>) -> Self {
        Self { x, y, k: 0 }
    }
}

/// `g1` in `g3 + y'Py/2 + b'y` form with `g3` absent, as the rate needs.
fn rate_structure(problem: &MinimaxProblem) -> Result<&StructuredDualSmooth> {
    let s = problem.g1().as_structured().ok_or_else(|| {
        Error::Uncertified("g1 is not in structured form y'Py/2 + b'y".into())
    })?;
    if s.g3().is_some() {
        return Err(Error::Uncertified("g1 has a g3 part".into()));
    }
    Ok(s)
}

fn beta_max(problem: &MinimaxProblem, s: &StructuredDualSmooth) -> f64 {
    let mu_x = problem.mu_x();
    mu_x / (problem.coupling().sigma_max().powi(2) + mu_x * s.lambda_max_p())
}

/// `alpha = 1/(2 L_x)` and `beta` at the top of its window.
pub fn pdpg_default_config(problem: &MinimaxProblem) -> Result<PdpgConfig> {
    let s = rate_structure(problem)?;
    if !problem.f2().is_zero() {
        return Err(Error::Uncertified("f2 must be zero".into()));
    }
    let a2 = check_assumption2(problem)?;
    if !a2.holds {
        return Err(Error::Uncertified(format!(
            "BB^T + cP is not positive definite for all c > 0 (witness {:e})",
            a2.witness
        )));
    }
    Ok(PdpgConfig {
        alpha: 0.5 / problem.l_x(),
        beta: beta_max(problem, s),
        theta_extrap: 0.0,
    })
}

/// `(c_x, c_y, delta)` of the Lyapunov contraction for `config`.
pub fn pdpg_rate(config: &PdpgConfig, problem: &MinimaxProblem) -> Result<PdpgRate> {
    config.validate()?;
    let s = rate_structure(problem)?;
    if config.theta_extrap != 0.0 {
        return Err(Error::Uncertified(format!(
            "no rate for extrapolation weight {}",
            config.theta_extrap
        )));
    }
    let (alpha, beta) = (config.alpha, config.beta);
    let (mu_x, l_x) = (problem.mu_x(), problem.l_x());
    if alpha * l_x >= 1.0 {
        return Err(Error::WindowViolation(format!(
            "alpha = {alpha} must be below 1/L_x = {}",
            1.0 / l_x
        )));
    }
    let bmax = beta_max(problem, s);
    if beta > bmax * (1.0 + 1e-12) {
        return Err(Error::WindowViolation(format!("beta = {beta} exceeds {bmax}")));
    }
    let smax2 = problem.coupling().sigma_max().powi(2);
    let lp = s.lambda_max_p();
    let denom = 1.0 - beta * lp;
    let c_x = 1.0 - alpha * beta * smax2 / denom;
    if !(denom > 0.0 && c_x > 0.0) {
        return Err(Error::WindowViolation(format!("c_x = {c_x} is not positive")));
    }
    let m = problem.coupling().gram_rows() + s.p() / alpha;
    let lam = linalg::sym_extremes(&m).0;
    let delta = 1.0 - (alpha * mu_x * (1.0 - alpha * l_x)).min(alpha * beta * lam);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::WindowViolation(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(PdpgRate {
        c_x,
        c_y: alpha / beta,
        delta,
    })
}

/// One iteration. Each oracle is called exactly once.
pub fn pdpg_step(problem: &MinimaxProblem, state: &PdpgState, config: &PdpgConfig) -> Result<PdpgState> {
    let (dx, dy) = problem.dims();
    if state.x.len() != dx || state.y.len() != dy {
        return Err(Error::DimensionMismatch {
            oracle: "pdpg state",
            expected: dx + dy,
            got: state.x.len() + state.y.len(),
        });
    }
    let (alpha, beta, theta) = (config.alpha, config.beta, config.theta_extrap);
    let gx = problem.f1().gradient(&state.x) + problem.coupling().apply_t(&state.y);
    let x = problem.f2().prox(alpha, &(&state.x - gx * alpha));
    let x_bar = if theta == 0.0 {
        x.clone()
    } else {
        &x + (&x - &state.x) * theta
    };
    let gy = problem.g1().gradient(&state.y) - problem.coupling().apply(&x_bar);
    let y = problem.g2().prox(beta, &(&state.y - gy * beta));
    Ok(PdpgState { x, y, k: state.k + 1 })
}

fn step_counts(t: u64) -> OracleCounts {
    OracleCounts {
        grad_f1: t,
        prox_f2: t,
        grad_g1: t,
        prox_g2: t,
        apply_b: t,
        apply_bt: t,
    }
}

/// Iterate from `(x0, y0)` until the stopping rule fires. With a reference
/// saddle the trace carries squared distances and, when the configuration
/// is certified, the Lyapunov value.
pub fn pdpg_run(
    problem: &MinimaxProblem,
    config: &PdpgConfig,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    stop: &StoppingRule,
    reference: Option<Reference<'_>>,
) -> Result<Trace> {
    config.validate()?;
    stop.validate()?;
    check_start(problem, x0, y0)?;
    let rate = pdpg_rate(config, problem).ok();
    let mut trace = Trace::new(TraceMeta {
        algo: "pdpg".into(),
        config: serde_json::to_value(config).unwrap_or_default(),
        instance_hash: None,
        constants: rate.and_then(|r| serde_json::to_value(r).ok()),
    });
    let mut cert_counts = OracleCounts::default();
    let mut state = PdpgState::new(x0.clone(), y0.clone());
    let mut image;
    loop {
        let (x_hat, y_hat, res) = counted_residuals(problem, &state.x, &state.y, &mut cert_counts)?;
        image = (x_hat, y_hat);
        let mut rec = TraceRecord {
            k: state.k,
            primal_cert: res.primal,
            dual_cert: res.dual,
            ..Default::default()
        };
        if let Some(r) = reference {
            let (dx2, dy2) = r.distances(&state.x, &state.y);
            rec.dist_x_sq = Some(dx2);
            rec.dist_y_sq = Some(dy2);
            rec.lyapunov = rate.map(|rt| rt.lyapunov(dx2, dy2));
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
        let next = pdpg_step(problem, &state, config)?;
        if !all_finite(&next.x) || !all_finite(&next.y) {
            return Err(Error::Diverged {
                iteration: next.k,
                last_x: state.x,
                last_y: state.y,
            });
        }
        state = next;
    }
    trace.counts = step_counts(state.k as u64);
    trace.certificate_counts = cert_counts;
    // the reported point is the one the last residual certifies
    trace.final_x = image.0.as_slice().to_vec();
    trace.final_y = image.1.as_slice().to_vec();
    Ok(trace)
}
