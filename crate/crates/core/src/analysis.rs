//! Spectral constants, convergence-case classification, dual strong-convexity
//! bounds, complexity arguments and the closed-form dual of quadratic
//! instances.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::MinimaxProblem;

/// Which linear-convergence regime an instance falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseLabel {
    /// g1 strongly convex.
    ScSc,
    /// f2 = 0 and B has full row rank.
    ScFullRank,
    /// f2 = g2 = 0 and g1 linear.
    ScLinear,
    /// f2 = 0, g1 = g3 + y'Py/2 + b'y with BB' + cP > 0 for all c > 0.
    Assumption2,
    /// Dual strong convexity declared by the caller.
    DualScOnly,
    Uncertified,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::ScSc => "SC_SC",
            CaseLabel::ScFullRank => "SC_FULL_RANK",
            CaseLabel::ScLinear => "SC_LINEAR",
            CaseLabel::Assumption2 => "ASSUMPTION2",
            CaseLabel::DualScOnly => "DUAL_SC_ONLY",
            CaseLabel::Uncertified => "UNCERTIFIED",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let label = match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SC_SC" => CaseLabel::ScSc,
            "SC_FULL_RANK" => CaseLabel::ScFullRank,
            "SC_LINEAR" => CaseLabel::ScLinear,
            "ASSUMPTION2" => CaseLabel::Assumption2,
            "DUAL_SC_ONLY" => CaseLabel::DualScOnly,
            "UNCERTIFIED" => CaseLabel::Uncertified,
            _ => return Err(Error::Parse(format!("unknown case label `{s}`"))),
        };
        Ok(label)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Condition numbers; `None` where the defining denominator vanishes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KappaTable {
    pub kappa_x: f64,
    pub kappa_y: Option<f64>,
    pub kappa_b: Option<f64>,
    pub kappa_b_prime: Option<f64>,
    pub kappa_xy: Option<f64>,
    pub kappa_xy_prime: Option<f64>,
    pub kappa_xy2: Option<f64>,
    pub kappa_xy3: Option<f64>,
    pub kappa_phi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub mu_x: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub mu_y: f64,
    pub sigma_max_b: f64,
    pub sigma_min_b: f64,
    pub sigma_min_nz_b: f64,
    pub lambda_max_p: Option<f64>,
    /// `lambda_min(B B^T + L_x P)`
    pub lambda_min_bbt_plus_lxp: Option<f64>,
    pub case: CaseLabel,
    pub mu_phi: f64,
    pub l_phi: f64,
    pub kappa: KappaTable,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// `lambda_min(B B^T + c P)` for structured g1.
pub fn lambda_min_bbt_plus(problem: &MinimaxProblem, c: f64) -> Option<f64> {
    let s = problem.g1().as_structured()?;
    let m = problem.coupling().gram_rows() + s.p() * c;
    Some(linalg::sym_extremes(&m).0)
}

fn lambda_max_p(problem: &MinimaxProblem) -> f64 {
    problem.g1().as_structured().map_or(0.0, |s| s.lambda_max_p())
}

/// Positivity threshold for eigenvalues of `BB^T + cP`, relative to the
/// larger of the two blocks.
fn positive_tol(problem: &MinimaxProblem, c: f64) -> f64 {
    1e-10 * problem.coupling().sigma_max().powi(2).max(c * lambda_max_p(problem))
}

pub fn derive_constants(problem: &MinimaxProblem) -> ProblemConstants {
    let (mu_x, l_x, l_y, mu_y) = (problem.mu_x(), problem.l_x(), problem.l_y(), problem.mu_y());
    let c = problem.coupling();
    let (smax, smin, snz) = (c.sigma_max(), c.sigma_min(), c.sigma_min_nz());
    let lambda_max_p = problem.g1().as_structured().map(|s| s.lambda_max_p());
    let lam = lambda_min_bbt_plus(problem, l_x);
    let case = classify_case(problem);
    let mu_phi = mu_phi_lower_bound(problem, case).unwrap_or(0.0);
    let l_phi = problem.l_phi();
    let tol = positive_tol(problem, l_x);
    let lam_pos = lam.filter(|&v| v > tol);
    let kappa = KappaTable {
        kappa_x: l_x / mu_x,
        kappa_y: ratio(l_y, mu_y),
        kappa_b: ratio(smax * smax, smin * smin),
        kappa_b_prime: ratio(smax * smax, snz * snz),
        kappa_xy: ratio(smax * smax, mu_x * mu_y),
        kappa_xy_prime: ratio(l_x * l_y, smin * smin),
        kappa_xy2: lam_pos.map(|v| l_x * l_y / v),
        kappa_xy3: lam_pos.map(|v| smax * smax / v),
        kappa_phi: ratio(l_phi, mu_phi),
    };
    ProblemConstants {
        mu_x,
        l_x,
        l_y,
        mu_y,
        sigma_max_b: smax,
        sigma_min_b: smin,
        sigma_min_nz_b: snz,
        lambda_max_p,
        lambda_min_bbt_plus_lxp: lam,
        case,
        mu_phi,
        l_phi,
        kappa,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assumption2Check {
    pub holds: bool,
    /// Smallest eigenvalue seen over the sampled `BB^T + cP`.
    pub witness: f64,
    pub eigen_test: bool,
    /// `rank([B | P]) == d_y`, i.e. `null(B^T) ∩ null(P) = {0}`.
    pub rank_test: bool,
}

/// Certify `BB^T + cP > 0` for all `c > 0` by sampling `c = c0` and
/// `c = 1e-6 c0`, with `c0 = sigma_max(B)^2 / lambda_max(P)` balancing the two
/// blocks, and by the joint null-space rank test; both must agree.
pub fn check_assumption2(problem: &MinimaxProblem) -> Result<Assumption2Check> {
    let s = problem
        .g1()
        .as_structured()
        .ok_or_else(|| Error::CaseMismatch("the null-space check needs a structured g1".into()))?;
    let smax2 = problem.coupling().sigma_max().powi(2);
    let lp = s.lambda_max_p();
    let c0 = if smax2 > 0.0 && lp > 0.0 { smax2 / lp } else { 1.0 };
    let (c1, c2) = (c0, 1e-6 * c0);
    let l1 = lambda_min_bbt_plus(problem, c1).unwrap_or(0.0);
    let l2 = lambda_min_bbt_plus(problem, c2).unwrap_or(0.0);
    let eigen_test = l1 > positive_tol(problem, c1) && l2 > positive_tol(problem, c2);
    let b = problem.coupling().matrix();
    let dy = b.nrows();
    let joined = DMatrix::from_fn(dy, b.ncols() + dy, |i, j| {
        if j < b.ncols() {
            b[(i, j)]
        } else {
            s.p()[(i, j - b.ncols())]
        }
    });
    let rank_test = linalg::rank(&joined) == dy;
    Ok(Assumption2Check {
        holds: eigen_test && rank_test,
        witness: l1.min(l2),
        eigen_test,
        rank_test,
    })
}

/// Regime by precedence: SC_SC, SC_FULL_RANK, SC_LINEAR, ASSUMPTION2,
/// DUAL_SC_ONLY, UNCERTIFIED.
pub fn classify_case(problem: &MinimaxProblem) -> CaseLabel {
    let f2_zero = problem.f2().is_zero();
    if problem.mu_y() > 0.0 {
        CaseLabel::ScSc
    } else if f2_zero && problem.coupling().has_full_row_rank() {
        CaseLabel::ScFullRank
    } else if f2_zero && problem.g2().is_zero() && problem.g1().is_declared_linear() {
        CaseLabel::ScLinear
    } else if f2_zero
        && problem.g1().as_structured().is_some()
        && check_assumption2(problem).is_ok_and(|c| c.holds)
    {
        CaseLabel::Assumption2
    } else if problem.declared_mu_phi().is_some() {
        CaseLabel::DualScOnly
    } else {
        CaseLabel::Uncertified
    }
}

/// Strong-convexity modulus of the dual function implied by `case`. For
/// SC_LINEAR the bound holds on `Range(B)` only.
pub fn mu_phi_lower_bound(problem: &MinimaxProblem, case: CaseLabel) -> Result<f64> {
    let c = problem.coupling();
    let l_x = problem.l_x();
    match case {
        CaseLabel::ScSc => {
            let mu_y = problem.mu_y();
            if mu_y > 0.0 {
                Ok(mu_y)
            } else {
                Err(Error::CaseMismatch("SC_SC needs mu_y > 0".into()))
            }
        }
        CaseLabel::ScFullRank => {
            if !problem.f2().is_zero() || !c.has_full_row_rank() {
                return Err(Error::CaseMismatch(
                    "SC_FULL_RANK needs f2 = 0 and sigma_min(B) > 0".into(),
                ));
            }
            Ok(c.sigma_min().powi(2) / l_x)
        }
        CaseLabel::ScLinear => {
            if c.sigma_min_nz() > 0.0 {
                Ok(c.sigma_min_nz().powi(2) / l_x)
            } else {
                Err(Error::CaseMismatch("SC_LINEAR needs B != 0".into()))
            }
        }
        CaseLabel::Assumption2 => {
            let lam = lambda_min_bbt_plus(problem, l_x).ok_or_else(|| {
                Error::CaseMismatch("ASSUMPTION2 needs a structured g1".into())
            })?;
            if lam > positive_tol(problem, l_x) {
                Ok(lam / l_x)
            } else {
                Err(Error::CaseMismatch(format!(
                    "ASSUMPTION2 needs lambda_min(BB^T + L_x P) > 0, got {lam:e}"
                )))
            }
        }
        CaseLabel::DualScOnly => problem
            .declared_mu_phi()
            .ok_or_else(|| Error::CaseMismatch("DUAL_SC_ONLY needs a declared mu_phi".into())),
        CaseLabel::Uncertified => Ok(0.0),
    }
}

/// Complexity arguments (the expressions inside the O(.) with log factors
/// dropped). `a_oracle`/`b_oracle` are for iDAPG; `pdpg` is present only
/// where PDPG carries a rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub case: CaseLabel,
    pub idapg_a: f64,
    pub idapg_b: f64,
    pub pdpg: Option<f64>,
}

fn need(v: Option<f64>, name: &str, case: CaseLabel) -> Result<f64> {
    v.ok_or_else(|| Error::CaseMismatch(format!("{name} undefined for {case}")))
}

pub fn predicted_complexities(constants: &ProblemConstants, case: CaseLabel) -> Result<ComplexityReport> {
    let k = &constants.kappa;
    let sqrt_kx = k.kappa_x.sqrt();
    let (b, pdpg) = match case {
        CaseLabel::ScSc => {
            let kxy = need(k.kappa_xy, "kappa_xy", case)?;
            let ky = need(k.kappa_y, "kappa_y", case)?;
            (kxy.sqrt().max(ky.sqrt()), None)
        }
        CaseLabel::ScFullRank => {
            let kxyp = need(k.kappa_xy_prime, "kappa_xy'", case)?;
            let kb = need(k.kappa_b, "kappa_B", case)?;
            (kxyp.sqrt().max((k.kappa_x * kb).sqrt()), None)
        }
        CaseLabel::ScLinear => {
            let kbp = need(k.kappa_b_prime, "kappa_B'", case)?;
            let b = (k.kappa_x * kbp).sqrt();
            return Ok(ComplexityReport {
                case,
                idapg_a: k.kappa_x * kbp.sqrt(),
                idapg_b: b,
                pdpg: None,
            });
        }
        CaseLabel::Assumption2 => {
            let k2 = need(k.kappa_xy2, "kappa_xy2", case)?;
            let k3 = need(k.kappa_xy3, "kappa_xy3", case)?;
            (
                k2.sqrt().max((k.kappa_x * k3).sqrt()),
                Some(k2.max(k.kappa_x * k3)),
            )
        }
        CaseLabel::DualScOnly => {
            let mu_phi = constants.mu_phi;
            if !(mu_phi > 0.0) {
                return Err(Error::CaseMismatch("DUAL_SC_ONLY needs mu_phi > 0".into()));
            }
            let b = (constants.l_y / mu_phi)
                .sqrt()
                .max(constants.sigma_max_b / (constants.mu_x * mu_phi).sqrt());
            (b, None)
        }
        CaseLabel::Uncertified => {
            return Err(Error::CaseMismatch("no complexity for UNCERTIFIED instances".into()))
        }
    };
    Ok(ComplexityReport {
        case,
        idapg_a: sqrt_kx * b,
        idapg_b: b,
        pdpg,
    })
}

/// Quadratic data `(Q, q)` of `f1 + f2` when `f1` is quadratic and `f2` is
/// zero or linear.
fn primal_quadratic(problem: &MinimaxProblem) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let q = problem
        .f1()
        .as_quadratic()
        .ok_or_else(|| Error::NotQuadratic("f1 is not a quadratic form".into()))?;
    let mut lin = q.linear.clone();
    match problem.f2() {
        crate::prox::ProxTerm::Zero => {}
        crate::prox::ProxTerm::Linear { c } => lin += DVector::from_column_slice(c),
        other => {
            return Err(Error::NotQuadratic(format!(
                "f2 must be zero or linear, got {}",
                other.name()
            )))
        }
    }
    Ok((q.hessian.clone(), lin))
}

/// `x*(y) = argmin_x f1(x) + f2(x) + y^T B x` for quadratic `f1 + f2`.
pub fn primal_argmin_quadratic(problem: &MinimaxProblem, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (q, lin) = primal_quadratic(problem)?;
    let rhs = -(problem.coupling().apply_t(y) + lin);
    linalg::solve(&q, &rhs, "f1 hessian")
}

/// `Phi(y) = g1(y) + (f1 + f2)^*(-B^T y) + g2(y)` for quadratic `f1 + f2`,
/// where `(f1 + f2)^*(v) = (v - q)^T Q^{-1} (v - q) / 2`.
pub fn dual_value_quadratic(problem: &MinimaxProblem, y: &DVector<f64>) -> Result<f64> {
    let (q, lin) = primal_quadratic(problem)?;
    let w = problem.coupling().apply_t(y) + lin;
    let sol = linalg::solve(&q, &w, "f1 hessian")?;
    Ok(problem.g1().value(y) + 0.5 * w.dot(&sol) + problem.g2().value(y))
}

/// `grad^2 phi = grad^2 g1 + B Q^{-1} B^T` for fully quadratic instances.
pub fn dual_hessian_quadratic(problem: &MinimaxProblem) -> Result<DMatrix<f64>> {
    let (q, _) = primal_quadratic(problem)?;
    let h_g1 = problem
        .g1()
        .quadratic_hessian()
        .ok_or_else(|| Error::NotQuadratic("g1 is not quadratic".into()))?;
    let b = problem.coupling().matrix();
    let q_inv_bt = q
        .clone()
        .lu()
        .solve(&b.transpose())
        .ok_or_else(|| Error::Singular("f1 hessian".into()))?;
    let h = h_g1 + b * q_inv_bt;
    Ok((&h + h.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Coupling, DualSmooth, SmoothTerm, StructuredDualSmooth};
    use crate::prox::ProxTerm;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    fn quad_problem(
        q: DMatrix<f64>,
        qlin: DVector<f64>,
        b: DMatrix<f64>,
        p: DMatrix<f64>,
        f2: ProxTerm,
    ) -> MinimaxProblem {
        let dy = b.nrows();
        MinimaxProblem::new(
            SmoothTerm::quadratic(q, qlin).unwrap(),
            f2,
            Coupling::new(b),
            DualSmooth::Structured(StructuredDualSmooth::new(None, p, DVector::zeros(dy)).unwrap()),
            ProxTerm::Zero,
        )
        .unwrap()
    }

    #[test]
    fn kappa_footnote_formulas() {
        // mu_x = 1, L_x = 4, mu_y = L_y = 1, sigma_max = 2
        let p = quad_problem(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])),
            DVector::zeros(2),
            m(1, 2, &[2.0, 0.0]),
            DMatrix::identity(1, 1),
            ProxTerm::Zero,
        );
        let c = derive_constants(&p);
        assert_eq!(c.kappa.kappa_x, 4.0);
        assert_eq!(c.kappa.kappa_y, Some(1.0));
        assert!((c.kappa.kappa_xy.unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(c.case, CaseLabel::ScSc);
    }

    #[test]
    fn orthogonal_coupling_weyl_tight() {
        let p = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            m(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DMatrix::zeros(2, 2),
            ProxTerm::Zero,
        );
        let c = derive_constants(&p);
        let lam = c.lambda_min_bbt_plus_lxp.unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
        assert!((lam - c.sigma_max_b.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn unit_row_kappa_b() {
        let p = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            m(1, 2, &[1.0, 0.0]),
            DMatrix::zeros(1, 1),
            ProxTerm::Zero,
        );
        let c = derive_constants(&p);
        assert_eq!(c.kappa.kappa_b, Some(1.0));
        assert_eq!(c.kappa.kappa_b_prime, Some(1.0));
        assert_eq!(c.kappa.kappa_y, None);
    }

    #[test]
    fn assumption2_examples() {
        let p = quad_problem(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            m(1, 1, &[1.0]),
            DMatrix::zeros(1, 1),
            ProxTerm::Zero,
        );
        assert!(check_assumption2(&p).unwrap().holds);

        let p = quad_problem(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            m(1, 1, &[0.0]),
            DMatrix::identity(1, 1),
            ProxTerm::Zero,
        );
        assert!(check_assumption2(&p).unwrap().holds);

        let p = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DMatrix::zeros(2, 2),
            ProxTerm::Zero,
        );
        let chk = check_assumption2(&p).unwrap();
        assert!(!chk.holds);
        assert!(chk.witness.abs() < 1e-12);
        assert!(!chk.rank_test && !chk.eigen_test);
    }

    #[test]
    fn mu_phi_bounds() {
        let sc = quad_problem(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            m(1, 1, &[1.0]),
            DMatrix::identity(1, 1) * 3.0,
            ProxTerm::Zero,
        );
        assert_eq!(mu_phi_lower_bound(&sc, CaseLabel::ScSc).unwrap(), 3.0);

        let fr = quad_problem(
            DMatrix::identity(2, 2) * 2.0,
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            ProxTerm::Zero,
        );
        assert!((mu_phi_lower_bound(&fr, CaseLabel::ScFullRank).unwrap() - 0.5).abs() < 1e-12);

        let a2 = quad_problem(
            DMatrix::identity(1, 1) * 2.0,
            DVector::zeros(1),
            m(1, 1, &[1.0]),
            DMatrix::identity(1, 1),
            ProxTerm::Zero,
        );
        assert!((mu_phi_lower_bound(&a2, CaseLabel::Assumption2).unwrap() - 1.5).abs() < 1e-12);

        let rank_def = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DMatrix::zeros(2, 2),
            ProxTerm::Zero,
        );
        assert!(matches!(
            mu_phi_lower_bound(&rank_def, CaseLabel::ScFullRank),
            Err(Error::CaseMismatch(_))
        ));
        assert_eq!(mu_phi_lower_bound(&rank_def, CaseLabel::Uncertified).unwrap(), 0.0);
    }

    #[test]
    fn classify_examples() {
        let sc = quad_problem(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            m(1, 1, &[1.0]),
            DMatrix::identity(1, 1),
            ProxTerm::Zero,
        );
        assert_eq!(classify_case(&sc), CaseLabel::ScSc);

        let fr = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            ProxTerm::Zero,
        );
        assert_eq!(classify_case(&fr), CaseLabel::ScFullRank);

        let a2 = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0])),
            ProxTerm::Zero,
        );
        assert_eq!(classify_case(&a2), CaseLabel::Assumption2);

        // same data with an l1 primal term leaves the f2 = 0 regime
        let nonsmooth = quad_problem(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            m(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0])),
            ProxTerm::L1 { weight: 1.0 },
        );
        assert_eq!(classify_case(&nonsmooth), CaseLabel::Uncertified);
        let declared = nonsmooth.with_declared_mu_phi(0.1).unwrap();
        assert_eq!(classify_case(&declared), CaseLabel::DualScOnly);

        let linear = MinimaxProblem::new(
            SmoothTerm::quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap(),
            ProxTerm::Zero,
            Coupling::new(m(2, 2, &[1.0, 0.0, 0.0, 0.0])),
            DualSmooth::Structured(StructuredDualSmooth::linear(DVector::from_vec(vec![1.0, 0.0]))),
            ProxTerm::Zero,
        )
        .unwrap();
        assert_eq!(classify_case(&linear), CaseLabel::ScLinear);
    }

    #[test]
    fn classification_stable_under_coupling_scaling() {
        let base = |s: f64| {
            quad_problem(
                DMatrix::identity(2, 2),
                DVector::zeros(2),
                m(2, 2, &[s, 0.0, 0.0, 0.0]),
                DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0])),
                ProxTerm::Zero,
            )
        };
        for s in [1e-3, 0.5, 1.0, 7.0, 1e3] {
            assert_eq!(classify_case(&base(s)), CaseLabel::Assumption2);
        }
    }

    fn constants_with(k: KappaTable) -> ProblemConstants {
        ProblemConstants {
            mu_x: 1.0,
            l_x: k.kappa_x,
            l_y: 1.0,
            mu_y: 1.0,
            sigma_max_b: 1.0,
            sigma_min_b: 1.0,
            sigma_min_nz_b: 1.0,
            lambda_max_p: None,
            lambda_min_bbt_plus_lxp: None,
            case: CaseLabel::ScSc,
            mu_phi: 1.0,
            l_phi: 2.0,
            kappa: k,
        }
    }

    #[test]
    fn table_row_arithmetic() {
        let c = constants_with(KappaTable {
            kappa_x: 4.0,
            kappa_xy: Some(4.0),
            kappa_y: Some(1.0),
            ..Default::default()
        });
        let r = predicted_complexities(&c, CaseLabel::ScSc).unwrap();
        assert_eq!((r.idapg_a, r.idapg_b), (4.0, 2.0));

        let c = constants_with(KappaTable {
            kappa_x: 4.0,
            kappa_xy2: Some(8.0),
            kappa_xy3: Some(2.0),
            ..Default::default()
        });
        let r = predicted_complexities(&c, CaseLabel::Assumption2).unwrap();
        assert_eq!(r.pdpg, Some(8.0));

        let c = constants_with(KappaTable {
            kappa_x: 1.0,
            kappa_xy: Some(1.0),
            kappa_y: Some(1.0),
            ..Default::default()
        });
        let r = predicted_complexities(&c, CaseLabel::ScSc).unwrap();
        assert_eq!((r.idapg_a, r.idapg_b), (1.0, 1.0));

        assert!(predicted_complexities(&c, CaseLabel::Assumption2).is_err());
        assert!(predicted_complexities(&c, CaseLabel::Uncertified).is_err());
    }

    #[test]
    fn dual_value_examples() {
        let p = quad_problem(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            m(1, 1, &[1.0]),
            DMatrix::identity(1, 1),
            ProxTerm::Zero,
        );
        let one = DVector::from_element(1, 1.0);
        assert!((dual_value_quadratic(&p, &one).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(dual_value_quadratic(&p, &DVector::zeros(1)).unwrap(), 0.0);

        let p = quad_problem(
            DMatrix::identity(1, 1),
            DVector::from_element(1, -1.0),
            m(1, 1, &[1.0]),
            DMatrix::identity(1, 1),
            ProxTerm::Zero,
        );
        assert!((dual_value_quadratic(&p, &one).unwrap() - 0.5).abs() < 1e-15);

        let nonsmooth = quad_problem(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            m(1, 1, &[1.0]),
            DMatrix::identity(1, 1),
            ProxTerm::L1 { weight: 1.0 },
        );
        assert!(matches!(
            dual_value_quadratic(&nonsmooth, &one),
            Err(Error::NotQuadratic(_))
        ));
    }

    #[test]
    fn case_label_strings_round_trip() {
        for c in [
            CaseLabel::ScSc,
            CaseLabel::ScFullRank,
            CaseLabel::ScLinear,
            CaseLabel::Assumption2,
            CaseLabel::DualScOnly,
            CaseLabel::Uncertified,
        ] {
            assert_eq!(CaseLabel::parse(c.as_str()).unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
    }
}
