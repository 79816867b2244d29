//! Proximal-friendly terms and the square-loss conjugate used by the ERM
//! instances.
//!
//! Every [`ProxTerm`] has a closed-form proximal map, value, and distance from
//! `-v` to its subdifferential. The `kind` tag doubles as the name used in the
//! instance JSON.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::SmoothTerm;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxTerm {
    #[default]
    Zero,
    /// `w * ||x||_1`
    L1 { weight: f64 },
    /// `(w/2) * ||x||^2`
    SquaredL2 { weight: f64 },
    /// Indicator of the box `[lower, upper]^d`.
    #[serde(alias = "box")]
    BoxIndicator { lower: f64, upper: f64 },
    /// `c^T x`
    Linear { c: Vec<f64> },
}

/// Names accepted by [`prox_instantiate`].
pub const CATALOG: [&str; 5] = ["zero", "l1", "squared_l2", "box_indicator", "linear"];

/// Build a catalog entry from its name and real parameters.
///
/// `l1` and `squared_l2` take one positive weight, `box_indicator` takes
/// `[lower, upper]`, and `linear` takes the coefficient vector.
pub fn prox_instantiate(name: &str, params: &[f64]) -> Result<ProxTerm> {
    let term = match name {
        "zero" => ProxTerm::Zero,
        "l1" => ProxTerm::L1 {
            weight: single(name, params)?,
        },
        "squared_l2" => ProxTerm::SquaredL2 {
            weight: single(name, params)?,
        },
        "box_indicator" => match params {
            [lower, upper] => ProxTerm::BoxIndicator {
                lower: *lower,
                upper: *upper,
            },
            _ => {
                return Err(Error::InvalidParameter(
                    "box_indicator takes [lower, upper]".into(),
                ))
            }
        },
        "linear" => ProxTerm::Linear { c: params.to_vec() },
        other => return Err(Error::UnknownProxKind(other.to_string())),
    };
    term.validate()?;
    Ok(term)
}

fn single(name: &str, params: &[f64]) -> Result<f64> {
    match params {
        [w] => Ok(*w),
        _ => Err(Error::InvalidParameter(format!("{name} takes one weight"))),
    }
}

fn soft_threshold(v: f64, width: f64) -> f64 {
    // |v| == width lands on 0
    if v > width {
        v - width
    } else if v < -width {
        v + width
    } else {
        0.0
    }
}

impl ProxTerm {
    pub fn name(&self) -> &'static str {
        match self {
            ProxTerm::Zero => "zero",
            ProxTerm::L1 { .. } => "l1",
            ProxTerm::SquaredL2 { .. } => "squared_l2",
            ProxTerm::BoxIndicator { .. } => "box_indicator",
            ProxTerm::Linear { .. } => "linear",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProxTerm::L1 { weight } | ProxTerm::SquaredL2 { weight } => {
                if !(*weight > 0.0 && weight.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "{} weight must be positive, got {weight}",
                        self.name()
                    )));
                }
            }
            ProxTerm::BoxIndicator { lower, upper } => {
                if lower.is_nan() || upper.is_nan() || lower > upper {
                    return Err(Error::InvalidParameter(format!(
                        "box_indicator needs lower <= upper, got [{lower}, {upper}]"
                    )));
                }
            }
            ProxTerm::Linear { c } => {
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("linear coefficients must be finite".into()));
                }
            }
            ProxTerm::Zero => {}
        }
        Ok(())
    }

    /// Required dimension, if the term carries one.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            ProxTerm::Linear { c } => Some(c.len()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ProxTerm::Zero => true,
            ProxTerm::Linear { c } => c.iter().all(|&v| v == 0.0),
            _ => false,
        }
    }

    /// Value in the extended reals; `+inf` outside the domain.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match self {
            ProxTerm::Zero => 0.0,
            ProxTerm::L1 { weight } => weight * x.lp_norm(1),
            ProxTerm::SquaredL2 { weight } => 0.5 * weight * x.norm_squared(),
            ProxTerm::BoxIndicator { lower, upper } => {
                if x.iter().all(|v| v >= lower && v <= upper) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxTerm::Linear { c } => c.iter().zip(x.iter()).map(|(a, b)| a * b).sum(),
        }
    }

    /// `argmin_u h(u) + ||u - v||^2 / (2t)`.
    pub fn prox(&self, t: f64, v: &DVector<f64>) -> DVector<f64> {
        match self {
            ProxTerm::Zero => v.clone(),
            ProxTerm::L1 { weight } => v.map(|vi| soft_threshold(vi, t * weight)),
            ProxTerm::SquaredL2 { weight } => v / (1.0 + t * weight),
            ProxTerm::BoxIndicator { lower, upper } => v.map(|vi| vi.clamp(*lower, *upper)),
            ProxTerm::Linear { c } => {
                DVector::from_iterator(v.len(), v.iter().zip(c).map(|(vi, ci)| vi - t * ci))
            }
        }
    }

    /// `min_{s in dh(x)} ||v + s||`; `+inf` when `x` is outside the domain.
    pub fn subgradient_distance(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self {
            ProxTerm::Zero => v.norm(),
            ProxTerm::L1 { weight } => x
                .iter()
                .zip(v.iter())
                .map(|(&xi, &vi)| {
                    let r = if xi > 0.0 {
                        vi + weight
                    } else if xi < 0.0 {
                        vi - weight
                    } else {
                        (vi.abs() - weight).max(0.0)
                    };
                    r * r
                })
                .sum::<f64>()
                .sqrt(),
            ProxTerm::SquaredL2 { weight } => (v + x * *weight).norm(),
            ProxTerm::BoxIndicator { lower, upper } => {
                let mut acc = 0.0;
                for (&xi, &vi) in x.iter().zip(v.iter()) {
                    if xi < *lower || xi > *upper {
                        return f64::INFINITY;
                    }
                    let r = if lower == upper {
                        0.0
                    } else if xi == *lower {
                        (-vi).max(0.0)
                    } else if xi == *upper {
                        vi.max(0.0)
                    } else {
                        vi
                    };
                    acc += r * r;
                }
                acc.sqrt()
            }
            ProxTerm::Linear { c } => v
                .iter()
                .zip(c)
                .map(|(vi, ci)| (vi + ci).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Fenchel conjugate of a loss, stored as a smooth term.
#[derive(Clone, Debug)]
pub struct ConjugateLoss {
    pub name: &'static str,
    pub smooth: SmoothTerm,
    pub labels: DVector<f64>,
    pub samples: usize,
}

/// Conjugate of `l(z) = ||z - y||^2 / (2p)`:
/// `l*(lambda) = (p/2)||lambda||^2 + lambda^T y`, with gradient
/// `p * lambda + y` and `mu = L = p`.
pub fn square_loss_conjugate(labels: &DVector<f64>, p: usize) -> Result<ConjugateLoss> {
    if p == 0 {
        return Err(Error::InvalidParameter("square loss needs p >= 1".into()));
    }
    if labels.len() != p {
        return Err(Error::DimensionMismatch {
            oracle: "square loss labels",
            expected: p,
            got: labels.len(),
        });
    }
    let smooth = SmoothTerm::scaled_identity(p as f64, labels.clone())?;
    Ok(ConjugateLoss {
        name: "square",
        smooth,
        labels: labels.clone(),
        samples: p,
    })
}

impl ConjugateLoss {
    /// The primal loss `l(z) = ||z - y||^2 / (2p)`.
    pub fn loss(&self, z: &DVector<f64>) -> f64 {
        (z - &self.labels).norm_squared() / (2.0 * self.samples as f64)
    }

    /// Maximizer of `lambda^T z - l(z)`.
    pub fn conjugate_argmax(&self, lambda: &DVector<f64>) -> DVector<f64> {
        lambda * self.samples as f64 + &self.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn zero_is_identity() {
        let t = prox_instantiate("zero", &[]).unwrap();
        assert_eq!(t.prox(7.0, &v(&[3.0, -2.0])), v(&[3.0, -2.0]));
    }

    #[test]
    fn l1_scalar_matches_grid_minimizer() {
        // brute force: argmin |u| + 0.5 (u - 2)^2 over a fine grid
        let grid_min = (0..=40_000)
            .map(|i| -2.0 + i as f64 * 1e-4)
            .min_by(|a, b| {
                let fa = a.abs() + 0.5 * (a - 2.0).powi(2);
                let fb = b.abs() + 0.5 * (b - 2.0).powi(2);
                fa.total_cmp(&fb)
            })
            .unwrap();
        assert!((grid_min - 1.0).abs() < 1e-3);
        let t = prox_instantiate("l1", &[1.0]).unwrap();
        assert_eq!(t.prox(1.0, &v(&[2.0])), v(&[1.0]));
    }

    #[test]
    fn box_prox_clamps() {
        let t = prox_instantiate("box_indicator", &[0.0, 1.0]).unwrap();
        assert_eq!(t.prox(5.0, &v(&[-3.0, 0.5, 9.0])), v(&[0.0, 0.5, 1.0]));
    }

    #[test]
    fn squared_l2_and_linear_closed_forms() {
        let s = prox_instantiate("squared_l2", &[2.0]).unwrap();
        assert_eq!(s.prox(0.5, &v(&[4.0])), v(&[2.0]));
        let l = prox_instantiate("linear", &[1.0, -1.0]).unwrap();
        assert_eq!(l.prox(2.0, &v(&[0.0, 0.0])), v(&[-2.0, 2.0]));
    }

    #[test]
    fn soft_threshold_kink_is_zero() {
        let t = ProxTerm::L1 { weight: 0.5 };
        assert_eq!(t.prox(2.0, &v(&[1.0, -1.0])), v(&[0.0, 0.0]));
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(
            prox_instantiate("nuclear", &[]),
            Err(Error::UnknownProxKind(_))
        ));
        assert!(prox_instantiate("l1", &[0.0]).is_err());
        assert!(prox_instantiate("squared_l2", &[-1.0]).is_err());
        assert!(prox_instantiate("box_indicator", &[1.0, 0.0]).is_err());
    }

    #[test]
    fn values_in_extended_reals() {
        let b = ProxTerm::BoxIndicator { lower: 0.0, upper: 1.0 };
        assert_eq!(b.value(&v(&[2.0])), f64::INFINITY);
        assert_eq!(b.value(&v(&[0.5])), 0.0);
        assert_eq!(ProxTerm::L1 { weight: 2.0 }.value(&v(&[1.0, -3.0])), 8.0);
    }

    #[test]
    fn subgradient_distance_cases() {
        let l1 = ProxTerm::L1 { weight: 1.0 };
        // at 0 the subdifferential is [-1, 1], so -0.5 is covered
        assert_eq!(l1.subgradient_distance(&v(&[0.0]), &v(&[0.5])), 0.0);
        assert_eq!(l1.subgradient_distance(&v(&[0.0]), &v(&[3.0])), 2.0);
        assert_eq!(l1.subgradient_distance(&v(&[1.0]), &v(&[-1.0])), 0.0);
        let b = ProxTerm::BoxIndicator { lower: 0.0, upper: 1.0 };
        assert_eq!(b.subgradient_distance(&v(&[0.0]), &v(&[2.0])), 0.0);
        assert_eq!(b.subgradient_distance(&v(&[0.0]), &v(&[-2.0])), 2.0);
        assert_eq!(b.subgradient_distance(&v(&[3.0]), &v(&[0.0])), f64::INFINITY);
        let point = ProxTerm::BoxIndicator { lower: 0.0, upper: 0.0 };
        assert_eq!(point.subgradient_distance(&v(&[0.0]), &v(&[5.0])), 0.0);
    }

    #[test]
    fn square_loss_conjugate_examples() {
        let c = square_loss_conjugate(&v(&[0.0]), 1).unwrap();
        assert_eq!(c.smooth.value(&v(&[0.0])), 0.0);
        assert_eq!(c.smooth.gradient(&v(&[0.0])), v(&[0.0]));

        let c = square_loss_conjugate(&v(&[1.0, -1.0]), 2).unwrap();
        let lam = v(&[1.0, 1.0]);
        assert_eq!(c.smooth.value(&lam), 2.0);
        assert_eq!(c.smooth.gradient(&lam), v(&[3.0, 1.0]));
        assert_eq!(c.smooth.mu(), 2.0);
        assert_eq!(c.smooth.l(), 2.0);

        assert!(square_loss_conjugate(&v(&[]), 0).is_err());
        assert!(square_loss_conjugate(&v(&[1.0]), 2).is_err());
    }

    #[test]
    fn square_loss_conjugacy_by_grid_search() {
        // p = 1: sup_z lambda z - (z - y)^2 / 2 on a grid
        let y = 0.7;
        let c = square_loss_conjugate(&v(&[y]), 1).unwrap();
        for &lam in &[-1.3, 0.0, 0.4, 2.0] {
            let (best_z, best) = (0..=80_000)
                .map(|i| -10.0 + i as f64 * 2.5e-4)
                .map(|z| (z, lam * z - 0.5 * (z - y).powi(2)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let closed = c.smooth.value(&v(&[lam]));
            assert!((best - closed).abs() < 1e-6, "lam={lam}");
            assert!((best_z - c.conjugate_argmax(&v(&[lam]))[0]).abs() < 1e-3);
        }
    }

    #[test]
    fn fenchel_young_equality_at_maximizer() {
        let labels = v(&[0.5, -1.0, 2.0]);
        let c = square_loss_conjugate(&labels, 3).unwrap();
        let lam = v(&[0.2, -0.1, 0.3]);
        let z = c.conjugate_argmax(&lam);
        let lhs = c.loss(&z) + c.smooth.value(&lam);
        assert!((lhs - lam.dot(&z)).abs() < 1e-8);
    }

    #[test]
    fn serde_kind_tags() {
        let t: ProxTerm = serde_json::from_str(r#"{"kind":"l1","weight":0.5}"#).unwrap();
        assert_eq!(t, ProxTerm::L1 { weight: 0.5 });
        let b: ProxTerm =
            serde_json::from_str(r#"{"kind":"box_indicator","lower":-1,"upper":1}"#).unwrap();
        assert_eq!(b.name(), "box_indicator");
        for name in CATALOG {
            assert!(serde_json::to_string(&prox_instantiate(name, match name {
                "zero" => &[],
                "box_indicator" => &[0.0, 1.0],
                _ => &[1.0],
            }).unwrap()).unwrap().contains(name));
        }
    }
}
