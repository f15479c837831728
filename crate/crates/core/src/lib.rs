//! Nonlocal p-Laplacian boundary value problems on an interval: energy
//! discretization, first eigenpair, constant-sign and nodal solutions.

// `!(x > y)` is used on purpose: it is true for NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod grid;
pub mod nonlocal;
pub mod pipeline;
pub mod reaction;
pub mod solvers;

pub use error::{Error, ErrorClass, Result};
pub use grid::{Grid, GridFunction};
pub use nonlocal::{
    apply_weak, check_pnp, energy, energy_gradient, seminorm_p, EnergyValue, PnpCheck,
};
pub use reaction::{Reaction, ReactionLaw, ReactionParams};
