use serde::{Deserialize, Serialize};

use super::descent::{minimize_energy_with, DescentOptions};
use super::{Method, SolveOutcome};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlocal::{energy, energy_gradient, phi, residual_proxy};
use crate::reaction::{Reaction, SourceLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Start from the subsolution; converges to the least solution.
    Up,
    /// Start from the supersolution; converges to the greatest solution.
    Down,
}

#[derive(Debug, Clone, Copy)]
pub struct MonotoneOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Gradient-proxy tolerance of each convex inner solve.
    pub inner_tol: f64,
    /// Allowed excursion outside `[sub, super]`.
    pub slack: f64,
    pub keep_iterates: bool,
}

impl MonotoneOptions {
    pub fn new(tol: f64) -> MonotoneOptions {
        MonotoneOptions {
            tol,
            max_iter: 5000,
            inner_tol: 1e-12,
            slack: 1e-10,
            keep_iterates: false,
        }
    }
}

/// Fixed-point iteration `u ↦ w`, where `w` solves
/// `A w + c2 h φ(w) = h (f(u) + c2 φ(u))`.
pub fn monotone_iteration(
    grid: &Grid,
    r: &Reaction,
    sub: &GridFunction,
    sup: &GridFunction,
    c2: f64,
    direction: Direction,
    tol: f64,
) -> Result<SolveOutcome> {
    monotone_iteration_with(grid, r, sub, sup, c2, direction, &MonotoneOptions::new(tol))
}

pub fn monotone_iteration_with(
    grid: &Grid,
    r: &Reaction,
    sub: &GridFunction,
    sup: &GridFunction,
    c2: f64,
    direction: Direction,
    opts: &MonotoneOptions,
) -> Result<SolveOutcome> {
    grid.check(sub)?;
    grid.check(sup)?;
    if let Some(node) = (0..grid.n()).find(|&i| sub[i] > sup[i]) {
        return Err(Error::Ordering {
            node,
            lower: sub[node],
            upper: sup[node],
        });
    }
    if !(c2 >= 0.0 && c2.is_finite()) {
        return Err(Error::ParameterConstraint(format!(
            "c2 must be nonnegative (got {c2})"
        )));
    }
    let p = grid.p();
    let inner = DescentOptions::new(opts.inner_tol);
    let mut u = match direction {
        Direction::Up => sub.clone(),
        Direction::Down => sup.clone(),
    };
    let mut iterates = Vec::new();
    if opts.keep_iterates {
        iterates.push(u.clone());
    }

    for iter in 1..=opts.max_iter {
        let source: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(i, &t)| r.f(i, t) + c2 * phi(t, p))
            .collect();
        let problem = Reaction::new(SourceLaw::new(source, c2, p), *r.params());
        let next = minimize_energy_with(grid, &problem, &u, &inner)?.u;
        if let Some(node) =
            (0..grid.n()).find(|&i| next[i] < sub[i] - opts.slack || next[i] > sup[i] + opts.slack)
        {
            return Err(Error::OrderIntervalExit {
                node,
                value: next[node],
                lower: sub[node],
                upper: sup[node],
            });
        }
        let change = next.distance(&u);
        u = next;
        if opts.keep_iterates {
            iterates.push(u.clone());
        }
        if change < opts.tol {
            let g = energy_gradient(grid, r, &u);
            return Ok(SolveOutcome {
                energy: energy(grid, r, &u).total,
                residual: residual_proxy(grid, &g),
                u,
                iterations: iter,
                method: Method::Monotone,
                steps: Vec::new(),
                iterates,
            });
        }
    }
    Err(Error::NonConvergence {
        method: "monotone",
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}
