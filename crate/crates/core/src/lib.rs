//! Primal-dual proximal gradient (PDPG) and inexact dual accelerated
//! proximal gradient (iDAPG) solvers for bilinearly coupled minimax problems
//!
//! ```text
//! min_x max_y  f1(x) + f2(x) + y^T B x - g1(y) - g2(y)
//! ```
//!
//! with `f1` strongly convex and smooth, `g1` smooth and convex, and `f2`,
//! `g2` proximal-friendly.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod apg;
pub mod error;
pub mod harness;
pub mod idapg;
pub mod linalg;
pub mod pdpg;
pub mod problem;
pub mod prox;
pub mod stopping;
pub mod trace;

pub use analysis::{
    check_assumption2, classify_case, derive_constants, mu_phi_lower_bound, predicted_complexities,
    CaseLabel, ComplexityReport, ProblemConstants,
};
pub use apg::{apg_iteration_bound, apg_minimize, ApgResult, CompositeObjective};
pub use error::{Error, Result};
pub use problem::{
    Certificate, Coupling, DualSmooth, MinimaxProblem, OracleCounts, SmoothOracle, SmoothTerm,
    StructuredDualSmooth,
};
pub use prox::ProxTerm;
pub use idapg::{
    epsilon1_gap_bound, idapg_run, idapg_step, momentum_beta, theorem3_schedule, DualConstants,
    IdapgState, ToleranceSchedule,
};
pub use pdpg::{pdpg_default_config, pdpg_rate, pdpg_run, pdpg_step, PdpgConfig, PdpgRate, PdpgState};
pub use stopping::{Reference, StoppingRule};
pub use trace::{empirical_rate, RunStatus, Trace, TraceRecord};
