//! First eigenpair of `(-Δ)_p^s u = λ m |u|^{p-2} u` with a nonnegative
//! weight `m`, by inverse power iteration.
//!
//! Each step solves `A w = h m φ(e)` and normalizes `w` in the discrete
//! `L^p` norm. For `p = 2` the step is a linear solve with a factorization
//! computed once; otherwise it is the minimization of the strictly convex
//! functional `[w]^p / p - h Σ m φ(e) w`.

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlocal::{abs_pow, operator_nodal, phi, seminorm_p, stiffness_matrix};
use crate::reaction::{Reaction, ReactionParams, SourceLaw};
use crate::solvers::{minimize_energy_with, DescentOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda1: f64,
    pub e1: GridFunction,
    pub weight: GridFunction,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Bound on the Euclidean norm of the nodal eigen-equation residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl EigenOptions {
    pub fn new(tol: f64) -> EigenOptions {
        EigenOptions {
            tol,
            max_iter: 5000,
        }
    }
}

pub fn first_eigenpair(grid: &Grid, m: &GridFunction, tol: f64) -> Result<EigenPair> {
    first_eigenpair_with(grid, m, None, &EigenOptions::new(tol))
}

/// As [`first_eigenpair`], starting from `start` instead of the default
/// positive bump `d(x)^s`.
pub fn first_eigenpair_with(
    grid: &Grid,
    m: &GridFunction,
    start: Option<&GridFunction>,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    validate_weight(grid, m)?;
    let bump = GridFunction::from_vec_unchecked(grid.boundary_weights());
    let first = match start {
        Some(s) => {
            grid.check(s)?;
            s.clone()
        }
        None => bump.clone(),
    };
    let pair = inverse_iteration(grid, m, &first, opts)?;
    if pair.e1.min_value() > 0.0 {
        return Ok(pair);
    }
    // A sign-changing limit means the start had no component along e1.
    let pair = inverse_iteration(grid, m, &bump, opts)?;
    if pair.e1.min_value() > 0.0 {
        Ok(pair)
    } else {
        Err(Error::NonConvergence {
            method: "eigen",
            iterations: pair.iterations,
            residual: pair.residual,
        })
    }
}

fn validate_weight(grid: &Grid, m: &GridFunction) -> Result<()> {
    if m.len() != grid.n() {
        return Err(Error::InvalidWeight(format!(
            "{} values for {} nodes",
            m.len(),
            grid.n()
        )));
    }
    if let Some(i) = m.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidWeight(format!(
            "m[{i}] = {} is not a nonnegative number",
            m[i]
        )));
    }
    if m.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidWeight("m vanishes identically".into()));
    }
    Ok(())
}

/// `h Σ m_i |u_i|^p`.
fn weighted_mass(grid: &Grid, m: &[f64], u: &[f64]) -> f64 {
    let p = grid.p();
    grid.h()
        * m.iter()
            .zip(u)
            .map(|(w, v)| w * abs_pow(*v, p))
            .sum::<f64>()
}

/// Scales `u` to unit discrete `L^p` norm with positive mean.
fn normalize(grid: &Grid, u: &[f64]) -> Option<GridFunction> {
    let norm = grid.lebesgue_norm(u, grid.p());
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    let sign = if u.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    Some(GridFunction::from_vec_unchecked(
        u.iter().map(|v| sign * v / norm).collect(),
    ))
}

/// Rayleigh quotient `[u]^p / (h Σ m |u|^p)`.
pub fn rayleigh_quotient(grid: &Grid, m: &[f64], u: &[f64]) -> f64 {
    seminorm_p(grid, u) / weighted_mass(grid, m, u)
}

fn residual_at(grid: &Grid, m: &[f64], lambda: f64, e: &[f64]) -> f64 {
    let (h, p) = (grid.h(), grid.p());
    operator_nodal(grid, e)
        .iter()
        .enumerate()
        .map(|(i, a)| a - lambda * h * m[i] * phi(e[i], p))
        .map(|r| r * r)
        .sum::<f64>()
        .sqrt()
}

/// Euclidean norm of `A e - λ h m φ(e)`.
pub fn eigen_residual(grid: &Grid, pair: &EigenPair) -> f64 {
    residual_at(grid, &pair.weight, pair.lambda1, &pair.e1)
}

enum Step {
    Linear(Cholesky<f64, Dyn>),
    Convex,
}

fn inverse_iteration(
    grid: &Grid,
    m: &GridFunction,
    start: &GridFunction,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let (n, p, h) = (grid.n(), grid.p(), grid.h());
    let step = if p == 2.0 {
        let chol = Cholesky::new(stiffness_matrix(grid)).ok_or(Error::NonConvergence {
            method: "eigen",
            iterations: 0,
            residual: f64::NAN,
        })?;
        Step::Linear(chol)
    } else {
        Step::Convex
    };
    let not_converged = |iterations, residual| Error::NonConvergence {
        method: "eigen",
        iterations,
        residual,
    };
    let mut e = normalize(grid, start).ok_or_else(|| not_converged(0, f64::NAN))?;
    let mut lambda = rayleigh_quotient(grid, m, &e);
    let mut res = residual_at(grid, m, lambda, &e);
    let dummy = ReactionParams {
        p,
        c0: 0.0,
        c1: 0.0,
        c2: 0.0,
        delta0: 0.0,
        q: 0.0,
        a_minus: 0.0,
        a_plus: 0.0,
        mu: 0.0,
        eta1: 0.0,
        eta2: 0.0,
    };
    for iter in 0..=opts.max_iter {
        if res < opts.tol {
            return Ok(EigenPair {
                lambda1: lambda,
                e1: e,
                weight: m.clone(),
                residual: res,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let rhs: Vec<f64> = (0..n).map(|i| m[i] * phi(e[i], p)).collect();
        let w: Vec<f64> = match &step {
            Step::Linear(chol) => {
                let b = DVector::from_iterator(n, rhs.iter().map(|v| h * v));
                chol.solve(&b).iter().copied().collect()
            }
            Step::Convex => {
                let problem = Reaction::new(SourceLaw::new(rhs, 0.0, p), dummy);
                // A e ≈ λ h m φ(e) and A is (p-1)-homogeneous.
                let guess = e.scaled(lambda.powf(-1.0 / (p - 1.0)));
                let inner = DescentOptions::new(1e-3 * opts.tol);
                minimize_energy_with(grid, &problem, &guess, &inner)?
                    .u
                    .into_inner()
            }
        };
        e = normalize(grid, &w).ok_or_else(|| not_converged(iter, res))?;
        lambda = rayleigh_quotient(grid, m, &e);
        res = residual_at(grid, m, lambda, &e);
    }
    Err(not_converged(opts.max_iter, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    #[test]
    fn matches_dense_eigensolver_for_p2() {
        let grid = Grid::new(-1.0, 1.0, 60, 2.0, 0.4).unwrap();
        let m = GridFunction::constant(60, 1.0);
        let pair = first_eigenpair(&grid, &m, 1e-11).unwrap();
        // Independent assembly of the stiffness matrix from the weights.
        let n = 60;
        let mut l = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    l[(i, j)] -= 2.0 * grid.kernel(i, j);
                    l[(i, i)] += 2.0 * grid.kernel(i, j);
                }
            }
            l[(i, i)] += 2.0 * grid.h() * grid.tails()[i];
        }
        let dense = SymmetricEigen::new(l / grid.h()).eigenvalues.min();
        assert!((pair.lambda1 - dense).abs() / dense < 1e-9);
        assert!(pair.e1.min_value() > 0.0);
        assert!((grid.lebesgue_norm(&pair.e1, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_detects_perturbations() {
        let grid = Grid::new(-1.0, 1.0, 40, 2.0, 0.4).unwrap();
        let m = GridFunction::constant(40, 1.0);
        let pair = first_eigenpair(&grid, &m, 1e-10).unwrap();
        let base = eigen_residual(&grid, &pair);
        assert!(base < 1e-10);
        let mut bumped = pair.clone();
        let mut v = bumped.e1.clone().into_inner();
        v[7] += 0.01;
        bumped.e1 = GridFunction::new(v).unwrap();
        assert!(eigen_residual(&grid, &bumped) > base);
        let mut doubled = pair.clone();
        doubled.lambda1 *= 2.0;
        assert!(eigen_residual(&grid, &doubled) > 1e-3);
    }

    #[test]
    fn degenerate_case_satisfies_the_equation() {
        let grid = Grid::new(-1.0, 1.0, 40, 3.0, 0.3).unwrap();
        let m = grid.sample(|x| 1.0 + 0.5 * x);
        let pair = first_eigenpair(&grid, &m, 1e-10).unwrap();
        assert!(pair.residual < 1e-10);
        assert!(pair.e1.min_value() > 0.0);
        assert!((grid.lebesgue_norm(&pair.e1, 3.0) - 1.0).abs() < 1e-12);
        // λ1 minimizes the Rayleigh quotient.
        for k in 1..5 {
            let trial = pair.e1.map(|v| v + 0.01 * k as f64);
            assert!(rayleigh_quotient(&grid, &m, &trial) > pair.lambda1);
        }
    }

    #[test]
    fn invalid_weights() {
        let grid = Grid::new(0.0, 1.0, 5, 2.0, 0.4).unwrap();
        for w in [
            vec![0.0; 5],
            vec![1.0, 1.0, -0.1, 1.0, 1.0],
            vec![1.0; 4],
            vec![1.0, f64::INFINITY, 1.0, 1.0, 1.0],
        ] {
            let m = GridFunction::from_vec_unchecked(w);
            assert!(matches!(
                first_eigenpair(&grid, &m, 1e-8),
                Err(Error::InvalidWeight(_))
            ));
        }
    }

    #[test]
    fn sign_changing_start_is_recovered() {
        let grid = Grid::new(-1.0, 1.0, 30, 2.0, 0.4).unwrap();
        let m = GridFunction::constant(30, 1.0);
        let odd = grid.sample(|x| x);
        let pair = first_eigenpair_with(&grid, &m, Some(&odd), &EigenOptions::new(1e-10)).unwrap();
        let reference = first_eigenpair(&grid, &m, 1e-10).unwrap();
        assert!(pair.e1.min_value() > 0.0);
        assert!((pair.lambda1 - reference.lambda1).abs() < 1e-9 * reference.lambda1);
    }
}
