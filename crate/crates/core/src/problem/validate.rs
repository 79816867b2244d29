//! Sampled checks of the oracle invariants (Lipschitz gradients, strong
//! monotonicity, finite-difference agreement, prox optimality).

use nalgebra::DVector;
use rand::Rng;

use super::{Coupling, DualSmooth, MinimaxProblem, SmoothTerm};
use crate::error::{Error, Result};
use crate::linalg;
use crate::prox::ProxTerm;

const REL_TOL: f64 = 1e-8;
const FD_TOL: f64 = 1e-5;

fn fail(msg: String) -> Result<()> {
    Err(Error::OracleCheck(msg))
}

pub fn check_smooth_term<R: Rng + ?Sized>(
    name: &str,
    term: &SmoothTerm,
    rng: &mut R,
    probes: usize,
) -> Result<()> {
    check_smooth(name, term.dim(), term.mu(), term.l(), |x| term.value(x), |x| term.gradient(x), rng, probes)
}

pub fn check_dual_smooth<R: Rng + ?Sized>(
    g1: &DualSmooth,
    rng: &mut R,
    probes: usize,
) -> Result<()> {
    check_smooth("g1", g1.dim(), g1.mu(), g1.l(), |y| g1.value(y), |y| g1.gradient(y), rng, probes)?;
    if let DualSmooth::Structured(s) = g1 {
        let p = s.p();
        if linalg::max_abs_asymmetry(p) > 1e-12 {
            return fail("g1: P not symmetric".into());
        }
        let (lmin, _) = linalg::sym_extremes(p);
        if lmin < -1e-10 {
            return fail(format!("g1: P not PSD (lambda_min {lmin:e})"));
        }
        for _ in 0..probes {
            let y = linalg::gaussian_vector(s.dim(), rng);
            let mut want = p * &y + s.b();
            if let Some(g3) = s.g3() {
                want += g3.gradient(&y);
            }
            let err = (g1.gradient(&y) - &want).norm();
            if err > REL_TOL * want.norm().max(1.0) {
                return fail(format!("g1: structured gradient inconsistent ({err:e})"));
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_smooth<R: Rng + ?Sized>(
    name: &str,
    dim: usize,
    mu: f64,
    l: f64,
    value: impl Fn(&DVector<f64>) -> f64,
    grad: impl Fn(&DVector<f64>) -> DVector<f64>,
    rng: &mut R,
    probes: usize,
) -> Result<()> {
    if !(0.0 <= mu && mu <= l) {
        return fail(format!("{name}: moduli out of order (mu={mu}, L={l})"));
    }
    for _ in 0..probes {
        let u = linalg::gaussian_vector(dim, rng);
        let v = linalg::gaussian_vector(dim, rng);
        let (gu, gv) = (grad(&u), grad(&v));
        let du = &u - &v;
        let dg = &gu - &gv;
        let dist = du.norm();
        let scale = (l * dist).max(dg.norm()).max(1e-300);
        if dg.norm() > l * dist + REL_TOL * scale {
            return fail(format!("{name}: gradient not {l}-Lipschitz"));
        }
        let inner = dg.dot(&du);
        if inner < mu * dist * dist - REL_TOL * scale * dist {
            return fail(format!("{name}: gradient not {mu}-strongly monotone"));
        }
        // central differences along a random unit direction
        let dir = linalg::gaussian_vector(dim, rng);
        let dir = if dir.norm() > 0.0 { &dir / dir.norm() } else { dir };
        let h = 1e-5 * u.norm().max(1.0);
        let fd = (value(&(&u + &dir * h)) - value(&(&u - &dir * h))) / (2.0 * h);
        let exact = gu.dot(&dir);
        if (fd - exact).abs() > FD_TOL * exact.abs().max(gu.norm()).max(1.0) {
            return fail(format!("{name}: gradient disagrees with finite differences ({fd} vs {exact})"));
        }
    }
    Ok(())
}

pub fn check_prox_term<R: Rng + ?Sized>(
    name: &str,
    term: &ProxTerm,
    dim: usize,
    rng: &mut R,
    probes: usize,
) -> Result<()> {
    for _ in 0..probes {
        let t: f64 = rng.random_range(0.05..5.0);
        let u = linalg::gaussian_vector(dim, rng) * 3.0;
        let v = linalg::gaussian_vector(dim, rng) * 3.0;
        let (pu, pv) = (term.prox(t, &u), term.prox(t, &v));
        let dp = &pu - &pv;
        let du = &u - &v;
        let scale = du.norm_squared().max(1e-300);
        if dp.norm() > du.norm() * (1.0 + 1e-12) {
            return fail(format!("{name}: prox expansive"));
        }
        if dp.dot(&du) < dp.norm_squared() - 1e-12 * scale {
            return fail(format!("{name}: prox not firmly nonexpansive"));
        }
        // (v - prox(t, v)) / t must be a subgradient at prox(t, v)
        let s = (&v - &pv) / t;
        let base = term.value(&pv);
        if !base.is_finite() {
            return fail(format!("{name}: prox left the domain"));
        }
        for _ in 0..4 {
            let w = term.prox(1.0, &(linalg::gaussian_vector(dim, rng) * 3.0));
            let lhs = term.value(&w);
            let rhs = base + s.dot(&(&w - &pv));
            if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
                return fail(format!("{name}: prox optimality violated ({lhs} < {rhs})"));
            }
        }
    }
    if term.is_zero() {
        let v = linalg::gaussian_vector(dim, rng);
        if term.prox(1.0, &v) != v {
            return fail(format!("{name}: zero term prox is not the identity"));
        }
    }
    Ok(())
}

pub fn check_coupling<R: Rng + ?Sized>(coupling: &Coupling, rng: &mut R, probes: usize) -> Result<()> {
    let (smax, smin, snz) = (coupling.sigma_max(), coupling.sigma_min(), coupling.sigma_min_nz());
    if !(smax >= snz && snz >= smin && smin >= 0.0) {
        return fail(format!("B: singular values out of order ({smax}, {snz}, {smin})"));
    }
    for _ in 0..probes {
        let v = linalg::gaussian_vector(coupling.dx(), rng);
        if coupling.apply(&v).norm() > smax * v.norm() * (1.0 + 1e-10) + 1e-300 {
            return fail("B: norm bound violated".into());
        }
    }
    let fresh = linalg::singular_values(coupling.matrix());
    if let Some(&top) = fresh.first() {
        if (top - smax).abs() > 1e-10 * top.max(1e-300) {
            return fail("B: cached sigma_max stale".into());
        }
    }
    Ok(())
}

/// Every oracle-level invariant of an assembled problem.
pub fn check_problem<R: Rng + ?Sized>(problem: &MinimaxProblem, rng: &mut R, probes: usize) -> Result<()> {
    let (dx, dy) = problem.dims();
    check_smooth_term("f1", problem.f1(), rng, probes)?;
    check_dual_smooth(problem.g1(), rng, probes)?;
    check_prox_term("f2", problem.f2(), dx, rng, probes)?;
    check_prox_term("g2", problem.g2(), dy, rng, probes)?;
    check_coupling(problem.coupling(), rng, probes)
}
