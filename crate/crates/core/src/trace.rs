//! Per-iteration solver records, JSON-lines / CSV persistence and rate
//! fitting.

use std::io::{BufRead, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::OracleCounts;

pub const SCHEMA_VERSION: u32 = 1;

/// Columns not produced by an algorithm are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub eps_k: Option<f64>,
    pub inner_iters: Option<usize>,
    pub primal_cert: f64,
    pub dual_cert: f64,
    pub dist_x_sq: Option<f64>,
    pub dist_y_sq: Option<f64>,
    pub lyapunov: Option<f64>,
}

pub const COLUMNS: [&str; 8] = [
    "k",
    "eps_k",
    "inner_iters",
    "primal_cert",
    "dual_cert",
    "dist_x_sq",
    "dist_y_sq",
    "lyapunov",
];

impl TraceRecord {
    pub fn get(&self, column: &str) -> Result<Option<f64>> {
        Ok(match column {
            "k" => Some(self.k as f64),
            "eps_k" => self.eps_k,
            "inner_iters" => self.inner_iters.map(|v| v as f64),
            "primal_cert" => Some(self.primal_cert),
            "dual_cert" => Some(self.dual_cert),
            "dist_x_sq" => self.dist_x_sq,
            "dist_y_sq" => self.dist_y_sq,
            "lyapunov" => self.lyapunov,
            _ => return Err(Error::InvalidParameter(format!("unknown trace column `{column}`"))),
        })
    }

    fn reals(&self) -> impl Iterator<Item = f64> + '_ {
        [
            self.eps_k,
            Some(self.primal_cert),
            Some(self.dual_cert),
            self.dist_x_sq,
            self.dist_y_sq,
            self.lyapunov,
        ]
        .into_iter()
        .flatten()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub algo: String,
    pub config: serde_json::Value,
    pub instance_hash: Option<String>,
    pub constants: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub meta: TraceMeta,
    pub status: RunStatus,
    /// Oracle calls made by the algorithm proper.
    pub counts: OracleCounts,
    /// Oracle calls spent on residual certificates and stopping tests.
    pub certificate_counts: OracleCounts,
    /// Certified image of the last iterate, whose residuals the last record
    /// holds.
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    pub records: Vec<TraceRecord>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: u32,
    meta: TraceMeta,
    status: RunStatus,
    counts: OracleCounts,
    certificate_counts: OracleCounts,
    final_x: Vec<f64>,
    final_y: Vec<f64>,
}

impl Trace {
    pub fn new(meta: TraceMeta) -> Self {
        Self {
            meta,
            status: RunStatus::MaxIterations,
            counts: OracleCounts::default(),
            certificate_counts: OracleCounts::default(),
            final_x: Vec::new(),
            final_y: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn final_x(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.final_x)
    }

    pub fn final_y(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.final_y)
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Number of iterations performed (the largest recorded `k`).
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    /// `(k, value)` pairs of a column, skipping records where it is absent.
    pub fn column(&self, name: &str) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(self.records.len());
        for r in &self.records {
            if let Some(v) = r.get(name)? {
                out.push((r.k, v));
            }
        }
        Ok(out)
    }

    /// `k` strictly increasing and every recorded real finite.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.records.windows(2) {
            if w[1].k <= w[0].k {
                return Err(Error::InvalidParameter(format!(
                    "trace k not increasing at {}",
                    w[1].k
                )));
            }
        }
        if let Some(r) = self.records.iter().find(|r| r.reals().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter(format!("non-finite value in trace at k={}", r.k)));
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            schema: SCHEMA_VERSION,
            meta: self.meta.clone(),
            status: self.status,
            counts: self.counts,
            certificate_counts: self.certificate_counts,
            final_x: self.final_x.clone(),
            final_y: self.final_y.clone(),
        };
        let ser = |e: serde_json::Error| Error::Parse(e.to_string());
        serde_json::to_writer(&mut w, &header).map_err(ser)?;
        writeln!(w)?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r).map_err(ser)?;
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trace".into()))??;
        let header: Header =
            serde_json::from_str(&first).map_err(|e| Error::Parse(format!("trace header: {e}")))?;
        if header.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported trace schema {}", header.schema)));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 2)))?;
            records.push(rec);
        }
        Ok(Self {
            meta: header.meta,
            status: header.status,
            counts: header.counts,
            certificate_counts: header.certificate_counts,
            final_x: header.final_x,
            final_y: header.final_y,
            records,
        })
    }

    /// Same columns as the JSON-lines records; absent values are empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", COLUMNS.join(","))?;
        for r in &self.records {
            let cells: Vec<String> = COLUMNS
                .iter()
                .map(|c| match c {
                    &"k" => r.k.to_string(),
                    &"inner_iters" => r.inner_iters.map(|v| v.to_string()).unwrap_or_default(),
                    c => r
                        .get(c)
                        .ok()
                        .flatten()
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                })
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default fraction of the pre-floor segment used by [`empirical_rate`].
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Values this far below the column maximum are treated as round-off.
const FLOOR_RATIO: f64 = 1e-26;

/// Per-iteration contraction factor `exp(slope)` of `log(value)` against `k`
/// over the trailing `tail_fraction` of the points before the column hits
/// zero or the round-off floor.
pub fn fit_rate(points: &[(usize, f64)], tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must be in (0, 1], got {tail_fraction}"
        )));
    }
    let peak = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let end = points
        .iter()
        .position(|&(_, v)| !(v > 0.0) || v < peak * FLOOR_RATIO || !v.is_finite())
        .unwrap_or(points.len());
    let segment = &points[..end];
    let take = ((segment.len() as f64) * tail_fraction).ceil() as usize;
    let tail = &segment[segment.len() - take.min(segment.len())..];
    if tail.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 positive points to fit a rate, have {}",
            tail.len()
        )));
    }
    let n = tail.len() as f64;
    let mk = tail.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let ml = tail.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(k, v) in tail {
        let dk = k as f64 - mk;
        sxy += dk * (v.ln() - ml);
        sxx += dk * dk;
    }
    Ok((sxy / sxx).exp())
}

pub fn empirical_rate(trace: &Trace, column: &str, tail_fraction: f64) -> Result<f64> {
    fit_rate(&trace.column(column)?, tail_fraction)
}
