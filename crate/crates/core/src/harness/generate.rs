//! Seeded quadratic instances for each certified case, and square-loss ERM
//! instances.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::{InstanceDescription, ReferenceDesc};
use super::reference::{reference_saddle, ReferenceMethod, ReferenceSaddle};
use crate::analysis::{check_assumption2, classify_case, CaseLabel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::validate::check_problem;
use crate::problem::{Coupling, DualSmooth, MinimaxProblem, SmoothTerm, StructuredDualSmooth};
use crate::prox::{square_loss_conjugate, ProxTerm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub dx: usize,
    pub dy: usize,
    pub case: CaseLabel,
    pub mu_x: f64,
    pub l_x: f64,
    /// Spectrum of `P` is `[mu_y, l_y]` for SC_SC; for ASSUMPTION2 `P` is
    /// singular with `lambda_max(P) = l_y`.
    pub mu_y: f64,
    pub l_y: f64,
    /// Nonzero singular values of `B` lie in `[sigma_min, sigma_max]`.
    pub sigma_min: f64,
    pub sigma_max: f64,
    #[serde(default)]
    pub f2: ProxTerm,
    #[serde(default)]
    pub g2: ProxTerm,
    /// Random `q` and `b`; otherwise both are zero.
    pub linear_terms: bool,
}

impl InstanceSpec {
    pub fn new(case: CaseLabel, seed: u64, dx: usize, dy: usize) -> Self {
        Self {
            seed,
            dx,
            dy,
            case,
            mu_x: 1.0,
            l_x: 10.0,
            mu_y: 0.5,
            l_y: 2.0,
            sigma_min: 0.5,
            sigma_max: 2.0,
            f2: ProxTerm::Zero,
            g2: ProxTerm::Zero,
            linear_terms: true,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("infeasible spectra: {m}")));
        if self.dx == 0 || self.dy == 0 {
            return bad("dimensions must be positive".into());
        }
        if !(0.0 < self.mu_x && self.mu_x <= self.l_x && self.l_x.is_finite()) {
            return bad(format!("need 0 < mu_x <= L_x, got {} and {}", self.mu_x, self.l_x));
        }
        if !(0.0 < self.sigma_min && self.sigma_min <= self.sigma_max && self.sigma_max.is_finite()) {
            return bad(format!(
                "need 0 < sigma_min <= sigma_max, got {} and {}",
                self.sigma_min, self.sigma_max
            ));
        }
        match self.case {
            CaseLabel::ScSc if !(0.0 < self.mu_y && self.mu_y <= self.l_y) => {
                bad(format!("SC_SC needs 0 < mu_y <= L_y, got {} and {}", self.mu_y, self.l_y))
            }
            CaseLabel::Assumption2 if !(self.l_y > 0.0) => bad("ASSUMPTION2 needs L_y > 0".into()),
            CaseLabel::ScFullRank if self.dy > self.dx => bad("SC_FULL_RANK needs d_y <= d_x".into()),
            CaseLabel::Assumption2 | CaseLabel::ScLinear if self.dy < 2 => {
                bad(format!("{} needs d_y >= 2 for a rank-deficient B", self.case))
            }
            CaseLabel::DualScOnly | CaseLabel::Uncertified => Err(Error::InvalidParameter(format!(
                "no generator for case {}",
                self.case
            ))),
            _ => Ok(()),
        }
    }
}

/// `n` values in `[lo, hi]` with both endpoints attained.
fn spectrum<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<Vec<f64>> {
    match n {
        0 => Ok(Vec::new()),
        1 if lo == hi => Ok(vec![lo]),
        1 => Err(Error::InvalidParameter(format!(
            "infeasible spectra: one eigenvalue cannot span [{lo}, {hi}]"
        ))),
        _ => {
            let mut v = vec![lo, hi];
            v.extend((2..n).map(|_| rng.random_range(lo..=hi)));
            Ok(v)
        }
    }
}

/// Rank of `B` per case.
fn coupling_rank(spec: &InstanceSpec) -> usize {
    let full = spec.dx.min(spec.dy);
    match spec.case {
        CaseLabel::Assumption2 => (spec.dy / 2).min(spec.dx),
        CaseLabel::ScLinear => full.min(spec.dy - 1),
        _ => full,
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub problem: MinimaxProblem,
    pub reference: ReferenceSaddle,
    pub description: InstanceDescription,
}

fn finish(problem: MinimaxProblem, reference: ReferenceSaddle) -> Result<GeneratedInstance> {
    let mut description = InstanceDescription::from_problem(&problem)?;
    description.reference = Some(ReferenceDesc {
        x: reference.x_star.as_slice().to_vec(),
        y: reference.y_star.as_slice().to_vec(),
    });
    Ok(GeneratedInstance {
        problem,
        reference,
        description,
    })
}

pub fn generate_quadratic_instance(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (dx, dy) = (spec.dx, spec.dy);

    let q_spec = spectrum(dx, spec.mu_x, spec.l_x, &mut rng)?;
    let q = linalg::with_spectrum(&linalg::random_orthogonal(dx, &mut rng), &q_spec);
    let u = linalg::random_orthogonal(dy, &mut rng);
    let v = linalg::random_orthogonal(dx, &mut rng);
    let r = coupling_rank(spec);
    let s = if r == 1 {
        vec![spec.sigma_max]
    } else {
        spectrum(r, spec.sigma_min, spec.sigma_max, &mut rng)?
    };
    let b = u.columns(0, r) * DMatrix::from_diagonal(&DVector::from_column_slice(&s)) * v.columns(0, r).transpose();

    let linear = |n: usize, rng: &mut ChaCha8Rng| {
        if spec.linear_terms {
            linalg::gaussian_vector(n, rng)
        } else {
            DVector::zeros(n)
        }
    };
    let q_lin = linear(dx, &mut rng);
    let b_lin = linear(dy, &mut rng);

    let g1 = match spec.case {
        CaseLabel::ScSc => {
            let p_spec = spectrum(dy, spec.mu_y, spec.l_y, &mut rng)?;
            let p = linalg::with_spectrum(&linalg::random_orthogonal(dy, &mut rng), &p_spec);
            StructuredDualSmooth::new(None, p, b_lin)?
        }
        CaseLabel::ScFullRank => StructuredDualSmooth::new(None, DMatrix::zeros(dy, dy), b_lin)?,
        CaseLabel::Assumption2 => {
            // range(P) = span(N + R M): N spans null(B^T), R spans range(B)
            let k = dy - r;
            let n = u.columns(r, k).into_owned();
            let mix = linalg::gaussian_matrix(r, k, &mut rng) * 0.5;
            let a = n + u.columns(0, r) * mix;
            let d: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..=1.0)).collect();
            let p = &a * DMatrix::from_diagonal(&DVector::from_vec(d)) * a.transpose();
            let p = (&p + p.transpose()) * 0.5;
            let top = linalg::sym_extremes(&p).1;
            StructuredDualSmooth::new(None, p * (spec.l_y / top), b_lin)?
        }
        CaseLabel::ScLinear => {
            // b in Range(B) keeps the maximization bounded
            let w = linalg::gaussian_vector(dx, &mut rng);
            StructuredDualSmooth::linear(if spec.linear_terms { &b * w } else { DVector::zeros(dy) })
        }
        CaseLabel::DualScOnly | CaseLabel::Uncertified => unreachable!("rejected by validate"),
    };

    let problem = MinimaxProblem::new(
        SmoothTerm::quadratic(q, q_lin)?,
        spec.f2.clone(),
        Coupling::new(b),
        DualSmooth::Structured(g1),
        spec.g2.clone(),
    )?;
    check_problem(&problem, &mut rng, 8)?;
    let got = classify_case(&problem);
    if got != spec.case {
        return Err(Error::CaseMismatch(format!("requested {}, built {got}", spec.case)));
    }
    if spec.case == CaseLabel::Assumption2 {
        let chk = check_assumption2(&problem)?;
        if !chk.holds {
            return Err(Error::CaseMismatch(format!(
                "null(B^T) and null(P) intersect (witness {:e})",
                chk.witness
            )));
        }
    }
    let reference = reference_saddle(&problem).map_err(|e| match e {
        Error::Singular(m) => {
            let w = check_assumption2(&problem).map(|c| c.witness).unwrap_or(f64::NAN);
            Error::Singular(format!("{m} (null-space witness {w:e})"))
        }
        other => other,
    })?;
    finish(problem, reference)
}

/// `min_theta max_lambda lambda^T X theta - l*(lambda) + (mu/2)||theta||^2
/// + w ||theta||_1` with the square loss `l(z) = ||z - labels||^2 / (2p)`.
pub fn erm_from_data(
    data: &DMatrix<f64>,
    labels: &DVector<f64>,
    mu: f64,
    l1_weight: Option<f64>,
) -> Result<GeneratedInstance> {
    let (p, d) = data.shape();
    if p == 0 || d == 0 {
        return Err(Error::InvalidParameter("ERM needs p >= 1 samples and d >= 1 features".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("ridge weight must be positive, got {mu}")));
    }
    let conj = square_loss_conjugate(labels, p)?;
    let g1 = StructuredDualSmooth::new(
        None,
        DMatrix::identity(p, p) * conj.samples as f64,
        conj.labels.clone(),
    )?;
    let f2 = match l1_weight {
        Some(w) if w > 0.0 => ProxTerm::L1 { weight: w },
        _ => ProxTerm::Zero,
    };
    let problem = MinimaxProblem::new(
        SmoothTerm::scaled_identity(mu, DVector::zeros(d))?,
        f2,
        Coupling::new(data.clone()),
        DualSmooth::Structured(g1),
        ProxTerm::Zero,
    )?;
    let reference = if problem.f2().is_zero() {
        // ridge: (mu I + X^T X / p) theta = X^T y / p, lambda = (X theta - y) / p
        let pf = p as f64;
        let lhs = DMatrix::identity(d, d) * mu + data.transpose() * data / pf;
        let theta = linalg::solve(&lhs, &(data.transpose() * labels / pf), "ridge normal equations")?;
        let lambda = (data * &theta - labels) / pf;
        ReferenceSaddle::accept(&problem, theta, lambda, ReferenceMethod::KktSolve)?
    } else {
        reference_saddle(&problem)?
    };
    finish(problem, reference)
}

pub fn generate_erm_instance(
    seed: u64,
    samples: usize,
    features: usize,
    mu: f64,
    l1_weight: Option<f64>,
) -> Result<GeneratedInstance> {
    if samples == 0 || features == 0 {
        return Err(Error::InvalidParameter("ERM needs p >= 1 samples and d >= 1 features".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = linalg::gaussian_matrix(samples, features, &mut rng) / (features as f64).sqrt();
    let truth = linalg::gaussian_vector(features, &mut rng);
    let labels = &data * truth + linalg::gaussian_vector(samples, &mut rng) * 0.1;
    erm_from_data(&data, &labels, mu, l1_weight)
}
