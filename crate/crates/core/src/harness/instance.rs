//! Instance description JSON.
//!
//! ```json
//! {
//!   "f1": {"kind": "quadratic", "Q": [[1.0]], "q": [0.0]},
//!   "f2": {"kind": "l1", "weight": 0.1},
//!   "B":  [[1.0]],
//!   "g1": {"kind": "structured", "P": [[1.0]], "b": [0.0]},
//!   "g2": {"kind": "zero"}
//! }
//! ```
//!
//! `f2`, `g2` default to zero and `q`, `b` to zero vectors. `g1` is one of
//! `structured` (optional quadratic `g3`), `linear` (`b` only) or
//! `quadratic` (generic). Optional `mu_phi` declares a dual
//! strong-convexity modulus and `reference` a known saddle point.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problem::{Coupling, DualSmooth, MinimaxProblem, SmoothTerm, StructuredDualSmooth};
use crate::prox::ProxTerm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticDesc {
    #[serde(rename = "Q")]
    pub hessian: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimalSmoothDesc {
    Quadratic {
        #[serde(rename = "Q")]
        hessian: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DualSmoothDesc {
    Structured {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g3: Option<QuadraticDesc>,
    },
    Linear {
        b: Vec<f64>,
    },
    Quadratic {
        #[serde(rename = "Q")]
        hessian: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDesc {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDescription {
    pub f1: PrimalSmoothDesc,
    #[serde(default)]
    pub f2: ProxTerm,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub g1: DualSmoothDesc,
    #[serde(default)]
    pub g2: ProxTerm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceDesc>,
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Parse(format!("{name}: empty matrix")));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("{name}: row {i} has {} entries, expected {ncols}", rows[i].len())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{name}: non-finite entry")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn vector(name: &str, v: Option<&Vec<f64>>, n: usize) -> Result<DVector<f64>> {
    match v {
        None => Ok(DVector::zeros(n)),
        Some(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
        Some(v) => Err(Error::Parse(format!("{name}: length {}, expected {n}", v.len()))),
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn quadratic(name: &str, hessian: &[Vec<f64>], q: Option<&Vec<f64>>) -> Result<SmoothTerm> {
    let h = matrix(name, hessian)?;
    let lin = vector(name, q, h.nrows())?;
    SmoothTerm::quadratic(h, lin)
}

impl InstanceDescription {
    pub fn to_problem(&self) -> Result<MinimaxProblem> {
        let PrimalSmoothDesc::Quadratic { hessian, q } = &self.f1;
        let f1 = quadratic("f1.Q", hessian, q.as_ref())?;
        let b = matrix("B", &self.b)?;
        let dy = b.nrows();
        let g1 = match &self.g1 {
            DualSmoothDesc::Structured { p, b, g3 } => {
                let p = matrix("g1.P", p)?;
                let lin = vector("g1.b", b.as_ref(), p.nrows())?;
                let g3 = g3
                    .as_ref()
                    .map(|g| quadratic("g1.g3", &g.hessian, g.q.as_ref()))
                    .transpose()?;
                DualSmooth::Structured(StructuredDualSmooth::new(g3, p, lin)?)
            }
            DualSmoothDesc::Linear { b } => {
                DualSmooth::Structured(StructuredDualSmooth::linear(vector("g1.b", Some(b), b.len())?))
            }
            DualSmoothDesc::Quadratic { hessian, q } => {
                DualSmooth::Generic(quadratic("g1.Q", hessian, q.as_ref())?)
            }
        };
        if g1.dim() != dy {
            return Err(Error::DimensionMismatch {
                oracle: "g1",
                expected: dy,
                got: g1.dim(),
            });
        }
        let problem = MinimaxProblem::new(f1, self.f2.clone(), Coupling::new(b), g1, self.g2.clone())?;
        match self.mu_phi {
            Some(m) => problem.with_declared_mu_phi(m),
            None => Ok(problem),
        }
    }

    /// Description of a problem whose smooth parts are quadratic.
    pub fn from_problem(problem: &MinimaxProblem) -> Result<Self> {
        let f1 = problem
            .f1()
            .as_quadratic()
            .ok_or_else(|| Error::NotQuadratic("f1 has a custom oracle".into()))?;
        let quad_desc = |t: &SmoothTerm| -> Result<QuadraticDesc> {
            let q = t
                .as_quadratic()
                .ok_or_else(|| Error::NotQuadratic("smooth term has a custom oracle".into()))?;
            Ok(QuadraticDesc {
                hessian: matrix_rows(&q.hessian),
                q: Some(q.linear.as_slice().to_vec()),
            })
        };
        let g1 = match problem.g1() {
            DualSmooth::Structured(s) if s.is_declared_linear() => DualSmoothDesc::Linear {
                b: s.b().as_slice().to_vec(),
            },
            DualSmooth::Structured(s) => DualSmoothDesc::Structured {
                p: matrix_rows(s.p()),
                b: Some(s.b().as_slice().to_vec()),
                g3: s.g3().map(quad_desc).transpose()?,
            },
            DualSmooth::Generic(t) => {
                let d = quad_desc(t)?;
                DualSmoothDesc::Quadratic {
                    hessian: d.hessian,
                    q: d.q,
                }
            }
        };
        Ok(Self {
            f1: PrimalSmoothDesc::Quadratic {
                hessian: matrix_rows(&f1.hessian),
                q: Some(f1.linear.as_slice().to_vec()),
            },
            f2: problem.f2().clone(),
            b: matrix_rows(problem.coupling().matrix()),
            g1,
            g2: problem.g2().clone(),
            mu_phi: problem.declared_mu_phi(),
            reference: None,
        })
    }

    pub fn reference_point(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        self.reference.as_ref().map(|r| {
            (
                DVector::from_column_slice(&r.x),
                DVector::from_column_slice(&r.y),
            )
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Parse("empty instance".into()));
        }
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance descriptions serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the compact JSON encoding, hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instance descriptions serialize");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR: &str = r#"{
        "f1": {"kind": "quadratic", "Q": [[1.0]]},
        "B": [[1.0]],
        "g1": {"kind": "structured", "P": [[1.0]]}
    }"#;

    #[test]
    fn parses_minimal_scalar() {
        let d = InstanceDescription::from_json(SCALAR).unwrap();
        let p = d.to_problem().unwrap();
        assert_eq!(p.dims(), (1, 1));
        assert!(p.f2().is_zero() && p.g2().is_zero());
        assert_eq!(p.mu_y(), 1.0);
    }

    #[test]
    fn round_trips_through_problem() {
        let text = r#"{
            "f1": {"kind": "quadratic", "Q": [[2.0, 0.5], [0.5, 1.0]], "q": [1.0, -1.0]},
            "f2": {"kind": "l1", "weight": 0.25},
            "B": [[1.0, 2.0]],
            "g1": {"kind": "linear", "b": [0.5]},
            "g2": {"kind": "box", "lower": -1.0, "upper": 1.0},
            "mu_phi": 0.1
        }"#;
        let d = InstanceDescription::from_json(text).unwrap();
        let p = d.to_problem().unwrap();
        assert!(p.g1().is_declared_linear());
        let back = InstanceDescription::from_problem(&p).unwrap();
        assert_eq!(back, InstanceDescription::from_json(&back.to_json()).unwrap());
        assert_eq!(back.to_problem().unwrap().declared_mu_phi(), Some(0.1));
        assert_eq!(back.hash(), InstanceDescription::from_json(&back.to_json()).unwrap().hash());
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "   ",
            "{",
            r#"{"f1": {"kind": "quadratic", "Q": [[1.0]]}, "B": [[1.0]], "g1": {"kind": "cubic"}}"#,
            r#"{"f1": {"kind": "quadratic", "Q": [[1.0], [1.0, 2.0]]}, "B": [[1.0]], "g1": {"kind": "linear", "b": [0]}}"#,
            r#"{"f1": {"kind": "quadratic", "Q": [[1.0]]}, "B": [[1.0]], "g1": {"kind": "linear", "b": [0]}, "extra": 1}"#,
        ] {
            let r = InstanceDescription::from_json(bad).and_then(|d| d.to_problem());
            assert!(matches!(r, Err(Error::Parse(_))), "{bad}: {r:?}");
        }
    }

    #[test]
    fn dimension_errors_name_the_oracle() {
        let text = r#"{"f1": {"kind": "quadratic", "Q": [[1.0]]}, "B": [[1.0]],
                       "g1": {"kind": "structured", "P": [[1.0, 0.0], [0.0, 1.0]]}}"#;
        let err = InstanceDescription::from_json(text).unwrap().to_problem().unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { oracle: "g1", .. }));
    }
}
