//! Discrete Gagliardo energy and the weak form of the fractional
//! p-Laplacian.
//!
//! With interaction weights `K_ij` and tails `τ_i` from [`Grid`],
//!
//! ```text
//! [u]^p   = Σ_{i≠j} K_ij |u_i - u_j|^p + 2 Σ_i τ_i h |u_i|^p
//! <A u, v> = Σ_{i≠j} K_ij φ(u_i - u_j)(v_i - v_j) + 2 Σ_i τ_i h φ(u_i) v_i
//! ```
//!
//! with `φ(t) = |t|^{p-2} t`. The energy of a reaction `f` is
//! `Φ(u) = [u]^p / p - h Σ_i F(x_i, u_i)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::reaction::Reaction;

/// `|x|^p`.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p == 1.0 {
        a
    } else if p == 0.0 {
        1.0
    } else {
        a.powf(p)
    }
}

/// `φ(x) = |x|^{p-2} x`.
#[inline]
pub fn phi(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x
    } else if p == 3.0 {
        x * x.abs()
    } else {
        x.abs().powf(p - 2.0) * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub seminorm_p: f64,
    pub potential: f64,
    pub total: f64,
}

pub fn seminorm_p(grid: &Grid, u: &[f64]) -> f64 {
    assert_eq!(u.len(), grid.n(), "grid function length");
    let (n, p, h) = (grid.n(), grid.p(), grid.h());
    let mut pairs = 0.0;
    for i in 0..n {
        let row = grid.kernel_row(i);
        let ui = u[i];
        let mut acc = 0.0;
        for j in (i + 1)..n {
            acc += row[j] * abs_pow(ui - u[j], p);
        }
        pairs += acc;
    }
    let tails: f64 = (0..n).map(|i| grid.tail_weight(i) * abs_pow(u[i], p)).sum();
    2.0 * pairs + 2.0 * h * tails
}

/// Nodal representation of `A u`: `<A u, v> = Σ_i (A u)_i v_i`.
pub fn operator_nodal(grid: &Grid, u: &[f64]) -> Vec<f64> {
    assert_eq!(u.len(), grid.n(), "grid function length");
    let (n, p, h) = (grid.n(), grid.p(), grid.h());
    let mut out: Vec<f64> = (0..n)
        .map(|i| 2.0 * h * grid.tail_weight(i) * phi(u[i], p))
        .collect();
    for i in 0..n {
        let row = grid.kernel_row(i);
        let ui = u[i];
        let mut acc = 0.0;
        for j in (i + 1)..n {
            let w = 2.0 * row[j] * phi(ui - u[j], p);
            acc += w;
            out[j] -= w;
        }
        out[i] += acc;
    }
    out
}

/// `<(-Δ)_p^s u, v>` for grid functions on the same grid.
pub fn apply_weak(grid: &Grid, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    grid.check(u)?;
    grid.check(v)?;
    Ok(operator_nodal(grid, u)
        .iter()
        .zip(v.iter())
        .map(|(a, b)| a * b)
        .sum())
}

pub fn potential(grid: &Grid, reaction: &Reaction, u: &[f64]) -> f64 {
    grid.h()
        * u.iter()
            .enumerate()
            .map(|(i, &t)| reaction.primitive(i, t))
            .sum::<f64>()
}

pub fn energy(grid: &Grid, reaction: &Reaction, u: &[f64]) -> EnergyValue {
    let seminorm = seminorm_p(grid, u);
    let pot = potential(grid, reaction, u);
    EnergyValue {
        seminorm_p: seminorm,
        potential: pot,
        total: seminorm / grid.p() - pot,
    }
}

/// `∂Φ/∂u_i`, so that `Σ_i g_i v_i = <A u, v> - h Σ_i f(x_i, u_i) v_i`.
pub fn energy_gradient(grid: &Grid, reaction: &Reaction, u: &[f64]) -> GridFunction {
    let h = grid.h();
    let mut g = operator_nodal(grid, u);
    for (i, gi) in g.iter_mut().enumerate() {
        *gi -= h * reaction.f(i, u[i]);
    }
    GridFunction::from_vec_unchecked(g)
}

/// Hessian of the discrete energy. Requires `p ≥ 2` so that the pair terms
/// are twice differentiable.
pub fn energy_hessian(grid: &Grid, reaction: &Reaction, u: &[f64]) -> DMatrix<f64> {
    let (n, p, h) = (grid.n(), grid.p(), grid.h());
    let c = 2.0 * (p - 1.0);
    let mut hess = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        hess[(i, i)] =
            c * h * grid.tail_weight(i) * abs_pow(u[i], p - 2.0) - h * reaction.slope(i, u[i]);
    }
    for i in 0..n {
        let row = grid.kernel_row(i);
        for j in (i + 1)..n {
            let w = c * row[j] * abs_pow(u[i] - u[j], p - 2.0);
            hess[(i, j)] = -w;
            hess[(j, i)] = -w;
            hess[(i, i)] += w;
            hess[(j, j)] += w;
        }
    }
    hess
}

/// Matrix of `u ↦ A u` for `p = 2` on the weights of `grid`, whatever its
/// `p`. Symmetric positive definite.
pub fn stiffness_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n();
    let h = grid.h();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = 2.0 * h * grid.tail_weight(i);
        let row = grid.kernel_row(i);
        for j in 0..n {
            if j != i {
                l[(i, j)] = -2.0 * row[j];
                l[(i, i)] += 2.0 * row[j];
            }
        }
    }
    l
}

/// Euclidean norm of a nodal gradient scaled by `h^{-1/p}`: the discrete
/// `L^{p'}`-type size of the residual density, used as a stand-in for the
/// dual norm.
pub fn residual_proxy(grid: &Grid, g: &[f64]) -> f64 {
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    norm * grid.h().powf(-1.0 / grid.p())
}

/// Both sides of `‖u^±‖^p ≤ <A u, ±u^±>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnpCheck {
    pub lhs_plus: f64,
    pub rhs_plus: f64,
    pub lhs_minus: f64,
    pub rhs_minus: f64,
}

impl PnpCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs_plus <= self.rhs_plus + slack && self.lhs_minus <= self.rhs_minus + slack
    }
}

pub fn check_pnp(grid: &Grid, u: &GridFunction) -> Result<PnpCheck> {
    grid.check(u)?;
    let plus = u.positive_part();
    let minus = u.negative_part();
    Ok(PnpCheck {
        lhs_plus: seminorm_p(grid, &plus),
        rhs_plus: apply_weak(grid, u, &plus)?,
        lhs_minus: seminorm_p(grid, &minus),
        rhs_minus: apply_weak(grid, u, &minus.scaled(-1.0))?,
    })
}
