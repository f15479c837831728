use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::reaction::{AuditReport, ReactionParams};
use crate::solvers::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub lambda1: f64,
    pub residual: f64,
    pub iterations: usize,
    pub e1_min: f64,
    pub e1_max: f64,
    pub e1_norm_p: f64,
}

/// Scalars describing one computed solution. `energy` and `residual` refer
/// to the untruncated functional; `engine_*` to the functional the solver
/// worked on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub method: Method,
    pub energy: f64,
    pub residual: f64,
    pub engine_energy: f64,
    pub engine_residual: f64,
    pub iterations: usize,
    pub min: f64,
    pub max: f64,
}

/// How the second positive solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum SecondSolution {
    /// The truncated minimization above the first solution found a distinct
    /// minimizer.
    Minimizer { gap: f64 },
    /// It returned the first solution; a mountain pass towards `τ e₁`
    /// produced the second one.
    MountainPass { gap: f64, tau: f64 },
}

/// Margins of the nodal orderings; each is nonnegative when the ordering
/// holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingChecks {
    /// `min u₀`.
    pub u0_positive: f64,
    /// `min (a₊ - u₀)`.
    pub u0_below_a_plus: f64,
    /// `min (a₊ - u₀) / d^s`.
    pub u0_below_a_plus_weighted: f64,
    /// `min (u₁ - u₀)`.
    pub u0_below_u1: f64,
    /// `min (-v₀)`.
    pub v0_negative: f64,
    /// `min (v₀ - a₋)`.
    pub v0_above_a_minus: f64,
    /// `min (v₀ - v₁)`.
    pub v1_below_v0: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSide {
    /// Max-norm distance to the corresponding minimizer.
    pub gap: f64,
    pub identified: bool,
    /// Distance between the limits from `τ₁ e₁` and `τ₂ e₁`.
    pub tau_gap: f64,
    /// Distance between the upward and downward limits.
    pub two_sided_gap: f64,
    /// `min (u - θ w)` for the scaled auxiliary minimizer.
    pub barrier_margin: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub aux_energy: f64,
    pub aux_max: f64,
    pub theta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub u_plus: ExtremalSide,
    pub v_minus: ExtremalSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalReport {
    pub changes_sign: bool,
    /// `Φ̃` at the pass point and at the two minimizers.
    pub energy_u_tilde: f64,
    pub energy_u0: f64,
    pub energy_v0: f64,
    /// `min (ũ - v₀)`.
    pub above_v0: f64,
    /// `min (u₀ - ũ)`.
    pub below_u0: f64,
    /// Distance of the minimizers of the one-signed truncations to u₀, v₀.
    pub plus_recovery_gap: f64,
    pub minus_recovery_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    /// Seconds since the Unix epoch; the only field that differs between
    /// identical runs.
    pub timestamp: u64,
    pub version: String,
    pub config: RunConfig,
    pub eigen: EigenSummary,
    pub params: ReactionParams,
    pub audit: AuditReport,
    pub u0: Option<SolutionSummary>,
    pub u1: Option<SolutionSummary>,
    pub v0: Option<SolutionSummary>,
    pub v1: Option<SolutionSummary>,
    pub u_tilde: Option<SolutionSummary>,
    pub u_plus: Option<SolutionSummary>,
    pub v_minus: Option<SolutionSummary>,
    pub second_positive: Option<SecondSolution>,
    pub second_negative: Option<SecondSolution>,
    pub ordering: Option<OrderingChecks>,
    pub extremal: Option<ExtremalReport>,
    pub nodal: Option<NodalReport>,
}
