//! Critical point engines for the discrete energy: descent to local
//! minimizers, mountain-pass path deformation and monotone iteration
//! between ordered sub- and supersolutions.

mod descent;
mod monotone;
mod mountain_pass;
mod ordering;

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;

pub use descent::{minimize_energy, minimize_energy_with, DescentOptions, StepRecord};
pub use monotone::{monotone_iteration, monotone_iteration_with, Direction, MonotoneOptions};
pub use mountain_pass::{mountain_pass, mountain_pass_with, MountainPassOptions, PathState};
pub use ordering::{ordering_diagnostics, OrderingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Minimize,
    MountainPass,
    Monotone,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub u: GridFunction,
    pub energy: f64,
    /// Gradient proxy of the energy the engine worked on, recomputed at `u`.
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
    /// Accepted descent steps; empty for the other engines.
    pub steps: Vec<StepRecord>,
    /// Monotone iterates including the start, when requested.
    pub iterates: Vec<GridFunction>,
}
