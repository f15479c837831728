use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Method, SolveOutcome};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlocal::{energy, energy_gradient, energy_hessian, residual_proxy};
use crate::reaction::Reaction;

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Sufficient decrease constant of the Armijo rule.
    pub armijo: f64,
    /// Use the (shifted) Hessian to precondition the gradient.
    pub newton: bool,
}

impl DescentOptions {
    pub fn new(tol: f64) -> DescentOptions {
        DescentOptions {
            tol,
            max_iter: 500,
            armijo: 1e-4,
            newton: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
    /// Accepted on gradient-norm decrease because the energy difference was
    /// below rounding; such steps need not lower the energy.
    pub merit: bool,
}

/// Local minimizer of the discrete energy of `r` near `start`.
pub fn minimize_energy(
    grid: &Grid,
    r: &Reaction,
    start: &GridFunction,
    tol: f64,
) -> Result<SolveOutcome> {
    minimize_energy_with(grid, r, start, &DescentOptions::new(tol))
}

pub fn minimize_energy_with(
    grid: &Grid,
    r: &Reaction,
    start: &GridFunction,
    opts: &DescentOptions,
) -> Result<SolveOutcome> {
    grid.check(start)?;
    let n = grid.n();
    let mut u = start.clone();
    let mut phi = finite(energy(grid, r, &u).total)?;
    let mut g = energy_gradient(grid, r, &u);
    let mut res = residual_proxy(grid, &g);
    let mut steps = Vec::new();

    for iter in 0..=opts.max_iter {
        if res < opts.tol {
            return Ok(SolveOutcome {
                u,
                energy: phi,
                residual: res,
                iterations: iter,
                method: Method::Minimize,
                steps,
                iterates: Vec::new(),
            });
        }
        if iter == opts.max_iter {
            break;
        }

        let dir = if opts.newton {
            newton_direction(grid, r, &u, &g)
        } else {
            g.iter().map(|v| -v).collect()
        };
        let slope: f64 = dir.iter().zip(g.iter()).map(|(d, gi)| d * gi).sum();
        let gnorm = norm(&g);
        let (dir, slope) = if slope < -1e-12 * gnorm * norm(&dir) {
            (dir, slope)
        } else {
            (g.iter().map(|v| -v).collect::<Vec<_>>(), -gnorm * gnorm)
        };

        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..60 {
            let trial = shifted(&u, t, &dir);
            let e = energy(grid, r, &trial).total;
            // Strict decrease rules out steps lost to rounding.
            if e.is_finite() && e <= phi + opts.armijo * t * slope && e < phi {
                accepted = Some((trial, e, false));
                break;
            }
            t *= 0.5;
        }
        if accepted.is_none() {
            // Energy differences are below rounding; fall back to the
            // gradient norm as merit function.
            t = 1.0;
            for _ in 0..40 {
                let trial = shifted(&u, t, &dir);
                let gt = energy_gradient(grid, r, &trial);
                if norm(&gt) < (1.0 - 1e-4 * t) * gnorm {
                    let e = finite(energy(grid, r, &trial).total)?;
                    accepted = Some((trial, e, true));
                    break;
                }
                t *= 0.5;
            }
        }
        let Some((next, e, merit)) = accepted else {
            return Err(Error::NonConvergence {
                method: "minimize",
                iterations: iter,
                residual: res,
            });
        };
        u = next;
        phi = e;
        g = energy_gradient(grid, r, &u);
        res = residual_proxy(grid, &g);
        steps.push(StepRecord {
            energy: phi,
            residual: res,
            step: t,
            merit,
        });
        debug_assert_eq!(u.len(), n);
    }
    Err(Error::NonConvergence {
        method: "minimize",
        iterations: opts.max_iter,
        residual: res,
    })
}

/// `-H⁻¹ g` with `H` shifted by a multiple of the identity until its
/// Cholesky factorization exists.
fn newton_direction(grid: &Grid, r: &Reaction, u: &[f64], g: &[f64]) -> Vec<f64> {
    let hess = energy_hessian(grid, r, u);
    let rhs = DVector::from_iterator(g.len(), g.iter().map(|v| -v));
    let scale = hess.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..40 {
        let shifted = if shift == 0.0 {
            hess.clone()
        } else {
            &hess + DMatrix::<f64>::identity(g.len(), g.len()) * shift
        };
        if let Some(chol) = Cholesky::new(shifted) {
            let d = chol.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return d.iter().copied().collect();
            }
        }
        shift = if shift == 0.0 {
            1e-10 * scale
        } else {
            10.0 * shift
        };
    }
    rhs.iter().copied().collect()
}

pub(crate) fn shifted(u: &GridFunction, t: f64, dir: &[f64]) -> GridFunction {
    GridFunction::from_vec_unchecked(u.iter().zip(dir).map(|(a, d)| a + t * d).collect())
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn finite(e: f64) -> Result<f64> {
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::EnergyNaN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::seminorm_p;
    use crate::reaction::{example_reaction, FnLaw, ReactionParams, SourceLaw};

    fn params(p: f64) -> ReactionParams {
        ReactionParams {
            p,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            delta0: 0.1,
            q: 1.5,
            a_minus: -1.0,
            a_plus: 1.0,
            mu: 1.5,
            eta1: 1.0,
            eta2: 1.0,
        }
    }

    #[test]
    fn linear_source_problem_matches_direct_solve() {
        let grid = Grid::new(-1.0, 1.0, 40, 2.0, 0.4).unwrap();
        let src: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + x).collect();
        let r = Reaction::new(SourceLaw::new(src.clone(), 0.0, 2.0), params(2.0));
        let out = minimize_energy(&grid, &r, &GridFunction::zeros(40), 1e-12).unwrap();
        // Oracle: the operator matrix is the Hessian of [u]^2 / 2.
        let zero = Reaction::new(FnLaw::new("0", |_| 0.0, |_| 0.0), params(2.0));
        let l = energy_hessian(&grid, &zero, &vec![0.0; 40]);
        let b = DVector::from_iterator(40, src.iter().map(|v| grid.h() * v));
        let exact = l.lu().solve(&b).unwrap();
        for i in 0..40 {
            assert!((out.u[i] - exact[i]).abs() < 1e-10);
        }
        assert!(out.residual < 1e-12);
    }

    #[test]
    fn truncated_example_has_negative_minimum() {
        let grid = Grid::new(-1.0, 1.0, 60, 2.0, 0.4).unwrap();
        let r = example_reaction(8.0, 9.5).unwrap();
        let a_plus = r.params().a_plus;
        let f0 = r.truncate_zero_aplus();
        let start = grid.sample(|x| 0.5 * a_plus * (1.0 - x * x));
        let out = minimize_energy(&grid, &f0, &start, 1e-9).unwrap();
        assert!(out.energy < 0.0);
        assert!(out.u.min_value() >= -1e-8 && out.u.max_value() <= a_plus + 1e-8);
        for w in out.steps.windows(2) {
            if !w[1].merit {
                assert!(w[1].energy < w[0].energy);
            }
        }
        let again = minimize_energy(&grid, &f0, &out.u, 1e-9).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.energy, out.energy);
        let recomputed = residual_proxy(&grid, &energy_gradient(&grid, &f0, &out.u));
        assert!((recomputed - out.residual).abs() < 1e-12);
    }

    #[test]
    fn p3_source_problem() {
        let grid = Grid::new(0.0, 1.0, 30, 3.0, 0.3).unwrap();
        let r = Reaction::new(SourceLaw::new(vec![1.0; 30], 0.5, 3.0), params(3.0));
        let out = minimize_energy(&grid, &r, &GridFunction::zeros(30), 1e-11).unwrap();
        assert!(out.u.min_value() > 0.0);
        // Testing the equation with u itself: [u]^3 + c h Σ|u|^3 = h Σ u.
        let lhs = seminorm_p(&grid, &out.u)
            + 0.5 * grid.h() * out.u.iter().map(|v| v.abs().powi(3)).sum::<f64>();
        let rhs = grid.h() * out.u.iter().sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-9 * rhs);
    }

    #[test]
    fn nan_energy_is_reported() {
        let grid = Grid::new(0.0, 1.0, 5, 2.0, 0.4).unwrap();
        let r = Reaction::new(FnLaw::new("nan", |_| f64::NAN, |_| f64::NAN), params(2.0));
        assert!(matches!(
            minimize_energy(&grid, &r, &GridFunction::constant(5, 0.1), 1e-8),
            Err(Error::EnergyNaN)
        ));
    }
}
