//! Uniform midpoint discretization of an interval and the quadrature weights
//! of the kernel `|x - y|^{-(1 + ps)}`.
//!
//! Functions on the grid are identified with their zero extension to the
//! whole line. The interaction of two distinct cells is approximated by the
//! midpoint rule, except for adjacent cells where the exact cell-pair
//! integral is used to tame the near-singularity. The self-interaction of a
//! cell is dropped: `|u(x) - u(y)|^p` vanishes to order `p >= 2` on the
//! diagonal while the kernel only blows up to order `1 + ps < 2`. The
//! interaction with the complement is integrated in closed form.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
    p: f64,
    s: f64,
    nodes: Vec<f64>,
    tail: Vec<f64>,
    /// Row-major `n x n`, zero diagonal.
    kernel: Vec<f64>,
}

/// Checks the exponent constraints shared by every grid.
pub fn validate_order(p: f64, s: f64) -> Result<()> {
    let ok = p.is_finite() && s.is_finite() && p >= 2.0 && s > 0.0 && s < 1.0 && p * s < 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidOrder { p, s })
    }
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize, p: f64, s: f64) -> Result<Grid> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain { a, b });
        }
        if n < 2 {
            return Err(Error::InvalidNodeCount(n));
        }
        validate_order(p, s)?;

        let h = (b - a) / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
        let ps = p * s;
        let tail = nodes
            .iter()
            .map(|&x| ((b - x).powf(-ps) + (x - a).powf(-ps)) / ps)
            .collect();

        // Weights only depend on |i - j| on a uniform grid.
        let alpha = 1.0 + ps;
        let by_offset: Vec<f64> = (0..n)
            .map(|k| match k {
                0 => 0.0,
                1 => adjacent_cell_integral(h, alpha),
                _ => h * h / (k as f64 * h).powf(alpha),
            })
            .collect();
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = by_offset[j - i];
                kernel[i * n + j] = w;
                kernel[j * n + i] = w;
            }
        }

        Ok(Grid {
            a,
            b,
            n,
            h,
            p,
            s,
            nodes,
            tail,
            kernel,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tails(&self) -> &[f64] {
        &self.tail
    }

    /// Interaction weight `K_ij`; zero on the diagonal.
    #[inline]
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    pub fn kernel_row(&self, i: usize) -> &[f64] {
        &self.kernel[i * self.n..(i + 1) * self.n]
    }

    /// `∫_{Ω^c} |x_i - y|^{-(1+ps)} dy`.
    pub fn tail_weight(&self, i: usize) -> f64 {
        self.tail[i]
    }

    /// `d_Ω(x_i)^s`, the distance to the complement raised to the order `s`.
    pub fn boundary_weight(&self, i: usize) -> f64 {
        let x = self.nodes[i];
        (x - self.a).min(self.b - x).powf(self.s)
    }

    pub fn boundary_weights(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.boundary_weight(i)).collect()
    }

    pub fn check(&self, u: &GridFunction) -> Result<()> {
        if u.len() == self.n {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.n,
                found: u.len(),
            })
        }
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction(self.nodes.iter().map(|&x| f(x)).collect())
    }

    /// Discrete `L^r` norm `(h Σ |u_i|^r)^{1/r}`.
    pub fn lebesgue_norm(&self, u: &[f64], r: f64) -> f64 {
        (self.h * u.iter().map(|v| v.abs().powf(r)).sum::<f64>()).powf(1.0 / r)
    }
}

/// `∫_0^h ∫_h^{2h} (y - x)^{-alpha} dy dx` for `1 < alpha < 2`.
fn adjacent_cell_integral(h: f64, alpha: f64) -> f64 {
    let e = 2.0 - alpha;
    (2f64.powf(e) - 2.0) * h.powf(e) / ((1.0 - alpha) * e)
}

/// Nodal values of a function on the grid; zero outside the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<GridFunction> {
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { node, value });
        }
        Ok(GridFunction(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> GridFunction {
        GridFunction(values)
    }

    pub fn zeros(n: usize) -> GridFunction {
        GridFunction(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> GridFunction {
        GridFunction(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `u⁺ = max(u, 0)`.
    pub fn positive_part(&self) -> GridFunction {
        self.map(|v| v.max(0.0))
    }

    /// `u⁻ = max(-u, 0)`, so that `u = u⁺ - u⁻`.
    pub fn negative_part(&self) -> GridFunction {
        self.map(|v| (-v).max(0.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> GridFunction {
        GridFunction(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.axpy(-1.0, other)
    }

    /// `max_i |self_i - other_i|`.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Deref for GridFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}
