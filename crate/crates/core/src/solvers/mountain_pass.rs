use nalgebra::{Cholesky, DVector};
use rayon::prelude::*;

use super::descent::{finite, norm, shifted};
use super::{Method, SolveOutcome};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlocal::{energy, energy_gradient, energy_hessian, residual_proxy, stiffness_matrix};
use crate::reaction::Reaction;

#[derive(Debug, Clone)]
pub struct MountainPassOptions {
    pub points: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Added to the initial straight path with weight `sin(π t)`.
    pub perturbation: Option<GridFunction>,
    /// Gradient proxy below which Newton's method on `∇Φ = 0` takes over
    /// from path deformation. Zero disables it.
    pub polish_below: f64,
    /// Period of polishing attempts regardless of the residual; large values
    /// disable them.
    pub polish_every: usize,
    /// Resample the path once the longest segment exceeds this multiple of
    /// the shortest one.
    pub respline_ratio: f64,
    pub armijo: f64,
}

impl MountainPassOptions {
    pub fn new(points: usize, tol: f64) -> MountainPassOptions {
        MountainPassOptions {
            points,
            tol,
            max_iter: 10_000,
            perturbation: None,
            polish_below: 1e-3,
            polish_every: 200,
            respline_ratio: 3.0,
            armijo: 1e-4,
        }
    }
}

/// Discrete path joining two fixed endpoints.
#[derive(Debug, Clone)]
pub struct PathState {
    pub points: Vec<GridFunction>,
    pub energies: Vec<f64>,
    pub max_index: usize,
    pub max_value: f64,
}

impl PathState {
    fn new(grid: &Grid, r: &Reaction, points: Vec<GridFunction>) -> Result<PathState> {
        let energies: Vec<f64> = points
            .par_iter()
            .map(|u| energy(grid, r, u).total)
            .collect();
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::EnergyNaN);
        }
        let mut state = PathState {
            points,
            energies,
            max_index: 0,
            max_value: f64::NEG_INFINITY,
        };
        state.locate_max();
        Ok(state)
    }

    /// Maximum over the interior points.
    fn locate_max(&mut self) {
        let m = self.points.len();
        let (k, v) = (1..m - 1)
            .map(|k| (k, self.energies[k]))
            .fold((1, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        self.max_index = k;
        self.max_value = v;
    }

    fn uneven(&self, ratio: f64) -> bool {
        let lengths: Vec<f64> = self
            .points
            .windows(2)
            .map(|w| norm(&w[1].sub(&w[0])))
            .collect();
        let longest = lengths.iter().copied().fold(0.0, f64::max);
        let shortest = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        longest > ratio * shortest
    }

    /// Resamples the path at equal arc length with cubic Hermite
    /// interpolation; the endpoints stay fixed.
    fn redistribute(&self) -> Vec<GridFunction> {
        let pts = &self.points;
        let m = pts.len();
        let mut arc = vec![0.0; m];
        for k in 1..m {
            arc[k] = arc[k - 1] + norm(&pts[k].sub(&pts[k - 1]));
        }
        let total = arc[m - 1];
        if !(total > 0.0) {
            return pts.clone();
        }
        // Tangents with respect to arc length.
        let tangent = |k: usize| -> Vec<f64> {
            let (lo, hi) = if k == 0 {
                (0, 1)
            } else if k == m - 1 {
                (m - 2, m - 1)
            } else {
                (k - 1, k + 1)
            };
            let ds = (arc[hi] - arc[lo]).max(f64::MIN_POSITIVE);
            pts[hi]
                .iter()
                .zip(pts[lo].iter())
                .map(|(a, b)| (a - b) / ds)
                .collect()
        };
        let tangents: Vec<Vec<f64>> = (0..m).map(tangent).collect();
        let mut out = Vec::with_capacity(m);
        out.push(pts[0].clone());
        let mut seg = 0;
        for k in 1..m - 1 {
            let target = total * k as f64 / (m - 1) as f64;
            while seg < m - 2 && arc[seg + 1] < target {
                seg += 1;
            }
            let ds = arc[seg + 1] - arc[seg];
            if ds <= 0.0 {
                out.push(pts[seg].clone());
                continue;
            }
            let u = ((target - arc[seg]) / ds).clamp(0.0, 1.0);
            let (u2, u3) = (u * u, u * u * u);
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            let v: Vec<f64> = (0..pts[seg].len())
                .map(|i| {
                    h00 * pts[seg][i]
                        + h10 * ds * tangents[seg][i]
                        + h01 * pts[seg + 1][i]
                        + h11 * ds * tangents[seg + 1][i]
                })
                .collect();
            out.push(GridFunction::from_vec_unchecked(v));
        }
        out.push(pts[m - 1].clone());
        out
    }
}

/// Critical point of mountain-pass type between `u_a` and `u_b`.
pub fn mountain_pass(
    grid: &Grid,
    r: &Reaction,
    u_a: &GridFunction,
    u_b: &GridFunction,
    points: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    mountain_pass_with(grid, r, u_a, u_b, &MountainPassOptions::new(points, tol))
}

pub fn mountain_pass_with(
    grid: &Grid,
    r: &Reaction,
    u_a: &GridFunction,
    u_b: &GridFunction,
    opts: &MountainPassOptions,
) -> Result<SolveOutcome> {
    grid.check(u_a)?;
    grid.check(u_b)?;
    if opts.points < 3 {
        return Err(Error::Config(format!(
            "mountain pass needs at least 3 path points (got {})",
            opts.points
        )));
    }
    if let Some(psi) = &opts.perturbation {
        grid.check(psi)?;
    }
    if u_a.distance(u_b) == 0.0 {
        return Err(Error::NoBarrier("endpoints coincide".into()));
    }
    let m = opts.points;
    let initial: Vec<GridFunction> = (0..m)
        .map(|k| {
            let t = k as f64 / (m - 1) as f64;
            let mut v = u_a.scaled(1.0 - t).axpy(t, u_b);
            if let Some(psi) = &opts.perturbation {
                v = v.axpy((std::f64::consts::PI * t).sin(), psi);
            }
            v
        })
        .collect();
    let mut path = PathState::new(grid, r, initial)?;
    let floor = path.energies[0].max(path.energies[m - 1]);
    if !(path.max_value > floor) {
        return Err(Error::NoBarrier(format!(
            "path maximum {:e} does not exceed the endpoint energies {:e}",
            path.max_value, floor
        )));
    }

    // Descent uses the gradient in the inner product of the p = 2 energy,
    // which removes the grid-dependent stiffness of the Euclidean one.
    let precond = Cholesky::new(stiffness_matrix(grid)).ok_or(Error::NonConvergence {
        method: "mountain-pass",
        iterations: 0,
        residual: f64::NAN,
    })?;
    let mut step = 1.0;
    let mut polish_after = 0;
    for iter in 0..opts.max_iter {
        let k = path.max_index;
        if !(path.max_value > floor) {
            return Err(Error::Collapse(format!(
                "path maximum fell to the endpoint level after {iter} iterations"
            )));
        }
        let u = path.points[k].clone();
        let g = energy_gradient(grid, r, &u);
        let res = residual_proxy(grid, &g);
        if res < opts.tol {
            return Ok(outcome(grid, r, u, iter));
        }
        if (res < opts.polish_below || iter % opts.polish_every == opts.polish_every - 1)
            && iter >= polish_after
        {
            if let Some(v) = newton_polish(grid, r, &u, opts.tol) {
                let e = energy(grid, r, &v).total;
                if e > floor {
                    return Ok(outcome(grid, r, v, iter));
                }
            }
            polish_after = iter + 50;
        }

        // One Armijo steepest-descent step at the maximum.
        let sobolev = precond.solve(&DVector::from_iterator(g.len(), g.iter().copied()));
        let dir: Vec<f64> = sobolev.iter().map(|v| -v).collect();
        let gg: f64 = sobolev.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        let e0 = path.max_value;
        step *= 4.0;
        let mut moved = None;
        for _ in 0..80 {
            let trial = shifted(&u, step, &dir);
            let e = energy(grid, r, &trial).total;
            if e.is_finite() && e <= e0 - opts.armijo * step * gg && e < e0 {
                moved = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = moved else {
            return Err(Error::NonConvergence {
                method: "mountain-pass",
                iterations: iter,
                residual: res,
            });
        };
        path.points[k] = next;
        if path.uneven(opts.respline_ratio) {
            let points = path.redistribute();
            path = PathState::new(grid, r, points)?;
        } else {
            path.energies[k] = energy(grid, r, &path.points[k]).total;
            path.locate_max();
        }
    }
    let k = path.max_index;
    let g = energy_gradient(grid, r, &path.points[k]);
    Err(Error::NonConvergence {
        method: "mountain-pass",
        iterations: opts.max_iter,
        residual: residual_proxy(grid, &g),
    })
}

fn outcome(grid: &Grid, r: &Reaction, u: GridFunction, iterations: usize) -> SolveOutcome {
    let g = energy_gradient(grid, r, &u);
    SolveOutcome {
        energy: energy(grid, r, &u).total,
        residual: residual_proxy(grid, &g),
        u,
        iterations,
        method: Method::MountainPass,
        steps: Vec::new(),
        iterates: Vec::new(),
    }
}

/// Newton's method on `∇Φ(u) = 0` with the gradient norm as merit
/// function. Converges to the nearby critical point regardless of its
/// Morse index.
fn newton_polish(
    grid: &Grid,
    r: &Reaction,
    start: &GridFunction,
    tol: f64,
) -> Option<GridFunction> {
    let mut u = start.clone();
    let mut g = energy_gradient(grid, r, &u);
    for _ in 0..60 {
        if residual_proxy(grid, &g) < tol {
            return Some(u);
        }
        let hess = energy_hessian(grid, r, &u);
        let rhs = DVector::from_iterator(g.len(), g.iter().map(|v| -v));
        let d = hess.lu().solve(&rhs)?;
        if d.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dir: Vec<f64> = d.iter().copied().collect();
        let gnorm = norm(&g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = shifted(&u, t, &dir);
            let gt = energy_gradient(grid, r, &trial);
            if norm(&gt) < (1.0 - 1e-4 * t) * gnorm {
                accepted = Some((trial, gt));
                break;
            }
            t *= 0.5;
        }
        let (next, gt) = accepted?;
        finite(energy(grid, r, &next).total).ok()?;
        u = next;
        g = gt;
    }
    (residual_proxy(grid, &g) < tol).then_some(u)
}
