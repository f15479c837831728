use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid, GridFunction};

/// Nodal comparison of `u` and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// `min_i (v_i - u_i)`.
    pub min_gap: f64,
    /// `min_i (v_i - u_i) / d(x_i)^s`.
    pub min_weighted_gap: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl OrderingReport {
    /// `u ≤ v + tol` at every node.
    pub fn ordered(&self, tol: f64) -> bool {
        self.min_gap >= -tol
    }
}

pub fn ordering_diagnostics(
    grid: &Grid,
    u: &GridFunction,
    v: &GridFunction,
) -> Result<OrderingReport> {
    grid.check(u)?;
    grid.check(v)?;
    let mut min_gap = f64::INFINITY;
    let mut min_weighted_gap = f64::INFINITY;
    for i in 0..grid.n() {
        let gap = v[i] - u[i];
        min_gap = min_gap.min(gap);
        min_weighted_gap = min_weighted_gap.min(gap / grid.boundary_weight(i));
    }
    Ok(OrderingReport {
        min_gap,
        min_weighted_gap,
        u_min: u.min_value(),
        u_max: u.max_value(),
        v_min: v.min_value(),
        v_max: v.max_value(),
    })
}
