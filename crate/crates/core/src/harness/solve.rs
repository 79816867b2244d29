//! Solver setup with defaults, and the side-by-side comparison.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::reference::ReferenceSaddle;
use crate::analysis::{classify_case, mu_phi_lower_bound, CaseLabel};
use crate::error::{Error, Result};
use crate::idapg::{
    epsilon1_gap_bound, idapg_run, theorem3_schedule, DualConstants, ToleranceSchedule, DEFAULT_C,
};
use crate::pdpg::{pdpg_default_config, pdpg_run, PdpgConfig};
use crate::problem::{MinimaxProblem, OracleCounts};
use crate::stopping::StoppingRule;
use crate::trace::{RunStatus, Trace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PdpgOptions {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub theta_extrap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdapgOptions {
    pub c: f64,
    /// Overrides the modulus implied by the instance's case.
    pub mu_phi: Option<f64>,
    /// Schedule used when `mu_phi = 0` (no certified schedule exists).
    pub epsilon1: f64,
    pub theta: f64,
}

impl Default for IdapgOptions {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            mu_phi: None,
            epsilon1: 1.0,
            theta: 0.9,
        }
    }
}

/// Feasible start: `(prox_f2(0), prox_g2(0))`.
pub fn default_start(problem: &MinimaxProblem) -> (DVector<f64>, DVector<f64>) {
    let (dx, dy) = problem.dims();
    (
        problem.f2().prox(1.0, &DVector::zeros(dx)),
        problem.g2().prox(1.0, &DVector::zeros(dy)),
    )
}

/// Default configuration with any overrides applied; without a default
/// (uncertified instance) both step sizes must be given.
pub fn pdpg_config(problem: &MinimaxProblem, opts: &PdpgOptions) -> Result<PdpgConfig> {
    let base = match (pdpg_default_config(problem), opts.alpha, opts.beta) {
        (Ok(c), _, _) => c,
        (Err(_), Some(alpha), Some(beta)) => PdpgConfig {
            alpha,
            beta,
            theta_extrap: 0.0,
        },
        (Err(e), _, _) => return Err(e),
    };
    let cfg = PdpgConfig {
        alpha: opts.alpha.unwrap_or(base.alpha),
        beta: opts.beta.unwrap_or(base.beta),
        theta_extrap: opts.theta_extrap.unwrap_or(base.theta_extrap),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn solve_pdpg(
    problem: &MinimaxProblem,
    opts: &PdpgOptions,
    stop: &StoppingRule,
    reference: Option<&ReferenceSaddle>,
) -> Result<Trace> {
    let cfg = pdpg_config(problem, opts)?;
    let (x0, y0) = default_start(problem);
    pdpg_run(problem, &cfg, &x0, &y0, stop, reference.map(|r| r.as_reference()))
}

/// Dual constants and schedule for `problem` starting at `y0`.
pub fn idapg_setup(
    problem: &MinimaxProblem,
    opts: &IdapgOptions,
    y0: &DVector<f64>,
) -> Result<(DualConstants, ToleranceSchedule)> {
    let mu_phi = match opts.mu_phi {
        Some(m) => m,
        None => {
            let case = classify_case(problem);
            mu_phi_lower_bound(problem, case)?
        }
    };
    let constants = DualConstants::new(problem, mu_phi)?;
    let schedule = if mu_phi > 0.0 {
        let gap = epsilon1_gap_bound(problem, y0, &constants, 1e-10)?;
        theorem3_schedule(&constants, opts.c, gap.max(1e-300))?
    } else {
        ToleranceSchedule::new(opts.epsilon1, opts.theta)?
    };
    Ok((constants, schedule))
}

pub fn solve_idapg(
    problem: &MinimaxProblem,
    opts: &IdapgOptions,
    stop: &StoppingRule,
    reference: Option<&ReferenceSaddle>,
) -> Result<Trace> {
    let (x0, y0) = default_start(problem);
    let (constants, schedule) = idapg_setup(problem, opts, &y0)?;
    idapg_run(problem, &constants, &schedule, &x0, &y0, stop, reference.map(|r| r.as_reference()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algo: String,
    pub status: Option<RunStatus>,
    pub error: Option<String>,
    pub iterations: usize,
    pub counts: OracleCounts,
    pub a_oracle_calls: u64,
    pub b_oracle_calls: u64,
    /// Sum of inner iterations (iDAPG).
    pub inner_iterations: Option<u64>,
    pub final_residual: Option<f64>,
}

impl RunSummary {
    pub fn of(algo: &str, run: &Result<Trace>) -> Self {
        match run {
            Ok(t) => Self {
                algo: algo.into(),
                status: Some(t.status),
                error: None,
                iterations: t.iterations(),
                counts: t.counts,
                a_oracle_calls: t.counts.a_calls(),
                b_oracle_calls: t.counts.b_calls(),
                inner_iterations: (algo == "idapg")
                    .then(|| t.records.iter().filter_map(|r| r.inner_iters).map(|v| v as u64).sum()),
                final_residual: t.last().map(|r| r.primal_cert.max(r.dual_cert)),
            },
            Err(e) => Self {
                algo: algo.into(),
                status: None,
                error: Some(e.to_string()),
                iterations: 0,
                counts: OracleCounts::default(),
                a_oracle_calls: 0,
                b_oracle_calls: 0,
                inner_iterations: None,
                final_residual: None,
            },
        }
    }
}

pub struct Comparison {
    pub case: CaseLabel,
    pub pdpg: Result<Trace>,
    pub idapg: Result<Trace>,
}

impl Comparison {
    pub fn summaries(&self) -> [RunSummary; 2] {
        [RunSummary::of("pdpg", &self.pdpg), RunSummary::of("idapg", &self.idapg)]
    }

    pub fn any_failed(&self) -> bool {
        !matches!(
            (&self.pdpg, &self.idapg),
            (Ok(a), Ok(b)) if a.status == RunStatus::Converged && b.status == RunStatus::Converged
        )
    }
}

/// Both solvers on the same instance, concurrently.
pub fn compare(
    problem: &MinimaxProblem,
    pdpg: &PdpgOptions,
    idapg: &IdapgOptions,
    stop: &StoppingRule,
    reference: Option<&ReferenceSaddle>,
) -> Comparison {
    let (a, b) = std::thread::scope(|s| {
        let h = s.spawn(|| solve_pdpg(problem, pdpg, stop, reference));
        let b = solve_idapg(problem, idapg, stop, reference);
        let a = h
            .join()
            .unwrap_or_else(|_| Err(Error::InvalidParameter("pdpg worker panicked".into())));
        (a, b)
    });
    Comparison {
        case: classify_case(problem),
        pdpg: a,
        idapg: b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate_quadratic_instance, InstanceSpec};

    #[test]
    fn compare_counts_split() {
        let g = generate_quadratic_instance(&InstanceSpec::new(CaseLabel::Assumption2, 1, 5, 4)).unwrap();
        let stop = StoppingRule::with_tol(20_000, 1e-9);
        let cmp = compare(&g.problem, &PdpgOptions::default(), &IdapgOptions::default(), &stop, Some(&g.reference));
        let [p, i] = cmp.summaries();
        assert!(!cmp.any_failed(), "{p:?} {i:?}");
        let t = p.iterations as u64;
        assert_eq!(p.counts.grad_f1, t);
        assert_eq!(p.counts.apply_bt, t);
        let k = i.iterations as u64;
        assert_eq!(i.b_oracle_calls, k);
        assert_eq!(i.counts.grad_f1, i.inner_iterations.unwrap());
    }

    #[test]
    fn uncertified_pdpg_needs_both_steps() {
        let mut spec = InstanceSpec::new(CaseLabel::ScSc, 2, 3, 3);
        spec.f2 = crate::prox::ProxTerm::L1 { weight: 0.1 };
        let g = generate_quadratic_instance(&spec).unwrap();
        assert!(matches!(pdpg_config(&g.problem, &PdpgOptions::default()), Err(Error::Uncertified(_))));
        let opts = PdpgOptions {
            alpha: Some(0.05),
            beta: Some(0.1),
            theta_extrap: None,
        };
        assert!(pdpg_config(&g.problem, &opts).is_ok());
    }
}
