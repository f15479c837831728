//! Reactions `f(x, t)` together with their primitives `F(x, t) = ∫_0^t f(x, τ) dτ`.
//!
//! The space variable enters only through the node index, which is enough
//! for the autonomous example and for truncations at node-dependent levels.

mod audit;
mod example;
mod laws;
mod tabulated;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

pub use audit::{audit_hypotheses, AuditReport, CheckResult, Hypothesis, SamplingPlan, Witness};
pub use example::{example_reaction, example_reaction_p, ExampleLaw};
pub use laws::{FnLaw, PowerLaw, SourceLaw};
pub use tabulated::TabulatedLaw;

/// A pointwise nonlinearity with its primitive.
pub trait ReactionLaw: Send + Sync + fmt::Debug {
    fn value(&self, node: usize, t: f64) -> f64;

    /// Antiderivative in `t`, vanishing at `t = 0`.
    fn primitive(&self, node: usize, t: f64) -> f64;

    /// `∂f/∂t`; only used to build Newton directions, so a difference
    /// quotient is acceptable.
    fn slope(&self, node: usize, t: f64) -> f64 {
        let step = 1e-7 * t.abs().max(1e-3);
        (self.value(node, t + step) - self.value(node, t - step)) / (2.0 * step)
    }
}

/// Constants attached to a reaction by the structural hypotheses: growth
/// `c0`, sublinearity `(c1, q, delta0)` near the origin, the zeros
/// `a_minus < 0 < a_plus`, the quasi-monotonicity shift `c2`, the reverse
/// Ambrosetti-Rabinowitz exponent `mu`, and the asymptotic slopes
/// `eta1 <= eta2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionParams {
    pub p: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta0: f64,
    pub q: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub mu: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl ReactionParams {
    /// Parameters of `t ↦ -f(-t)`.
    pub fn reflected(&self) -> ReactionParams {
        ReactionParams {
            a_minus: -self.a_plus,
            a_plus: -self.a_minus,
            ..*self
        }
    }
}

#[derive(Clone)]
pub struct Reaction {
    law: Arc<dyn ReactionLaw>,
    params: ReactionParams,
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction")
            .field("law", &self.law)
            .field("params", &self.params)
            .finish()
    }
}

/// Level at which a truncation acts: a constant or one value per node.
#[derive(Debug, Clone)]
pub enum Level {
    Constant(f64),
    Nodal(Arc<[f64]>),
}

impl Level {
    #[inline]
    fn at(&self, node: usize) -> f64 {
        match self {
            Level::Constant(c) => *c,
            Level::Nodal(v) => v[node],
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Level::Constant(_) => None,
            Level::Nodal(v) => Some(v.len()),
        }
    }
}

impl From<f64> for Level {
    fn from(c: f64) -> Level {
        Level::Constant(c)
    }
}

impl From<&GridFunction> for Level {
    fn from(u: &GridFunction) -> Level {
        Level::Nodal(u.values().into())
    }
}

/// What the truncated reaction does beyond a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beyond {
    /// Keep the value `f(x, level(x))`.
    Frozen,
    /// Switch the reaction off.
    Zero,
}

#[derive(Debug, Clone)]
struct Knot {
    level: Level,
    beyond: Beyond,
}

#[derive(Debug)]
struct Truncated {
    inner: Arc<dyn ReactionLaw>,
    lower: Option<Knot>,
    upper: Option<Knot>,
}

impl Truncated {
    fn bounds(&self, node: usize) -> (f64, f64) {
        let lo = self
            .lower
            .as_ref()
            .map_or(f64::NEG_INFINITY, |k| k.level.at(node));
        let hi = self
            .upper
            .as_ref()
            .map_or(f64::INFINITY, |k| k.level.at(node));
        (lo, hi)
    }

    fn beyond_value(&self, knot: &Knot, node: usize, level: f64) -> f64 {
        match knot.beyond {
            Beyond::Frozen => self.inner.value(node, level),
            Beyond::Zero => 0.0,
        }
    }

    /// An antiderivative of the truncated reaction (not normalized at 0).
    fn antiderivative(&self, node: usize, t: f64) -> f64 {
        let (lo, hi) = self.bounds(node);
        let clamped = t.max(lo).min(hi);
        let mut acc = self.inner.primitive(node, clamped);
        if let Some(k) = &self.lower {
            if t < lo {
                acc += self.beyond_value(k, node, lo) * (t - lo);
            }
        }
        if let Some(k) = &self.upper {
            if t > hi {
                acc += self.beyond_value(k, node, hi) * (t - hi);
            }
        }
        acc
    }
}

impl ReactionLaw for Truncated {
    fn value(&self, node: usize, t: f64) -> f64 {
        let (lo, hi) = self.bounds(node);
        if t < lo {
            self.beyond_value(self.lower.as_ref().unwrap(), node, lo)
        } else if t > hi {
            self.beyond_value(self.upper.as_ref().unwrap(), node, hi)
        } else {
            self.inner.value(node, t)
        }
    }

    fn primitive(&self, node: usize, t: f64) -> f64 {
        self.antiderivative(node, t) - self.antiderivative(node, 0.0)
    }

    fn slope(&self, node: usize, t: f64) -> f64 {
        let (lo, hi) = self.bounds(node);
        if t < lo || t > hi {
            0.0
        } else {
            self.inner.slope(node, t)
        }
    }
}

/// `t ↦ f(x, t⁺)` or `t ↦ f(x, -t⁻)`.
#[derive(Debug)]
struct SignPart {
    inner: Arc<dyn ReactionLaw>,
    positive: bool,
}

impl SignPart {
    fn fold(&self, t: f64) -> f64 {
        if self.positive {
            t.max(0.0)
        } else {
            t.min(0.0)
        }
    }
}

impl ReactionLaw for SignPart {
    fn value(&self, node: usize, t: f64) -> f64 {
        self.inner.value(node, self.fold(t))
    }

    fn primitive(&self, node: usize, t: f64) -> f64 {
        let folded = self.fold(t);
        self.inner.primitive(node, folded) + self.inner.value(node, 0.0) * (t - folded)
    }

    fn slope(&self, node: usize, t: f64) -> f64 {
        if self.fold(t) == t && t != 0.0 {
            self.inner.slope(node, t)
        } else {
            0.0
        }
    }
}

/// `t ↦ -f(x, -t)`.
#[derive(Debug)]
struct Reflected {
    inner: Arc<dyn ReactionLaw>,
}

impl ReactionLaw for Reflected {
    fn value(&self, node: usize, t: f64) -> f64 {
        -self.inner.value(node, -t)
    }

    fn primitive(&self, node: usize, t: f64) -> f64 {
        self.inner.primitive(node, -t)
    }

    fn slope(&self, node: usize, t: f64) -> f64 {
        self.inner.slope(node, -t)
    }
}

impl Reaction {
    pub fn new(law: impl ReactionLaw + 'static, params: ReactionParams) -> Reaction {
        Reaction {
            law: Arc::new(law),
            params,
        }
    }

    #[inline]
    pub fn f(&self, node: usize, t: f64) -> f64 {
        self.law.value(node, t)
    }

    #[inline]
    pub fn primitive(&self, node: usize, t: f64) -> f64 {
        self.law.primitive(node, t)
    }

    #[inline]
    pub fn slope(&self, node: usize, t: f64) -> f64 {
        self.law.slope(node, t)
    }

    pub fn params(&self) -> &ReactionParams {
        &self.params
    }

    pub fn with_params(&self, params: ReactionParams) -> Reaction {
        Reaction {
            law: self.law.clone(),
            params,
        }
    }

    fn wrap(&self, law: impl ReactionLaw + 'static) -> Reaction {
        Reaction {
            law: Arc::new(law),
            params: self.params,
        }
    }

    fn truncated(&self, lower: Option<Knot>, upper: Option<Knot>) -> Result<Reaction> {
        if let (Some(lo), Some(hi)) = (&lower, &upper) {
            let n = match (lo.level.len(), hi.level.len()) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::GridMismatch {
                        expected: a,
                        found: b,
                    })
                }
                (Some(a), _) | (_, Some(a)) => a,
                (None, None) => 1,
            };
            for node in 0..n {
                let (l, u) = (lo.level.at(node), hi.level.at(node));
                if l > u {
                    return Err(Error::Ordering {
                        node,
                        lower: l,
                        upper: u,
                    });
                }
            }
        }
        Ok(self.wrap(Truncated {
            inner: self.law.clone(),
            lower,
            upper,
        }))
    }

    /// Switches the reaction off outside `[0, a₊]`.
    pub fn truncate_zero_aplus(&self) -> Reaction {
        let knot = |level: f64| Knot {
            level: Level::Constant(level),
            beyond: Beyond::Zero,
        };
        self.truncated(Some(knot(0.0)), Some(knot(self.params.a_plus)))
            .expect("0 < a_plus")
    }

    /// Freezes the reaction at `f(x, floor(x))` below `floor`.
    pub fn truncate_below(&self, floor: impl Into<Level>) -> Reaction {
        let knot = Knot {
            level: floor.into(),
            beyond: Beyond::Frozen,
        };
        self.truncated(Some(knot), None)
            .expect("one-sided truncation")
    }

    /// Freezes the reaction outside `[lower(x), upper(x)]`.
    pub fn truncate_interval(
        &self,
        lower: impl Into<Level>,
        upper: impl Into<Level>,
    ) -> Result<Reaction> {
        self.truncated(
            Some(Knot {
                level: lower.into(),
                beyond: Beyond::Frozen,
            }),
            Some(Knot {
                level: upper.into(),
                beyond: Beyond::Frozen,
            }),
        )
    }

    /// `(f(x, t⁺), f(x, -t⁻))`.
    pub fn split_signs(&self) -> (Reaction, Reaction) {
        (
            self.wrap(SignPart {
                inner: self.law.clone(),
                positive: true,
            }),
            self.wrap(SignPart {
                inner: self.law.clone(),
                positive: false,
            }),
        )
    }

    /// `t ↦ -f(x, -t)`, mapping negative solutions to positive ones.
    pub fn reflected(&self) -> Reaction {
        Reaction {
            law: Arc::new(Reflected {
                inner: self.law.clone(),
            }),
            params: self.params.reflected(),
        }
    }
}

/// Locates the first positive zero of `f(x_0, ·)` in `(0, t_hi)` by a scan
/// followed by bisection. Requires `f > 0` near `0⁺` and `f(t_hi) < 0`.
pub fn find_positive_root(r: &Reaction, t_hi: f64) -> Result<f64> {
    let f = |t: f64| r.f(0, t);
    if !(t_hi > 0.0) || !(f(t_hi) < 0.0) {
        return Err(Error::NoSignChange { lo: 0.0, hi: t_hi });
    }
    // Log-spaced scan from the origin: the first sign change brackets a₊.
    let samples = 4000;
    let t_lo = t_hi * 1e-14;
    let ratio = (t_hi / t_lo).powf(1.0 / samples as f64);
    let mut prev = t_lo;
    if !(f(prev) > 0.0) {
        return Err(Error::NoSignChange { lo: 0.0, hi: t_hi });
    }
    let mut bracket = None;
    for k in 1..=samples {
        let t = if k == samples {
            t_hi
        } else {
            t_lo * ratio.powi(k)
        };
        if f(t) <= 0.0 {
            bracket = Some((prev, t));
            break;
        }
        prev = t;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoSignChange { lo: 0.0, hi: t_hi })?;
    if f(hi) == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    if f(root).abs() < 1e-12 {
        Ok(root)
    } else {
        Err(Error::NoSignChange { lo, hi })
    }
}

/// Mirror of [`find_positive_root`] on the negative semiaxis.
pub fn find_negative_root(r: &Reaction, t_lo: f64) -> Result<f64> {
    find_positive_root(&r.reflected(), -t_lo).map(|t| -t)
}

/// Largest `δ ≤ a₊/2` with `f(t) ≥ c1 t^{q-1}` on `(0, δ]`, located on a
/// uniform scan refined by a log-spaced check close to the origin.
pub fn estimate_delta0(r: &Reaction, c1: f64, q: f64, a_plus: f64) -> Result<f64> {
    let holds = |t: f64| r.f(0, t) >= c1 * t.powf(q - 1.0);
    let cap = 0.5 * a_plus;
    let steps = 4000;
    let first = cap / steps as f64;
    let near_zero_ok = (0..200).all(|k| holds(first * 10f64.powf(-12.0 * k as f64 / 199.0)));
    if !near_zero_ok || !holds(first) {
        return Err(Error::ParameterConstraint(format!(
            "f(t) >= {c1} t^{} fails arbitrarily close to 0",
            q - 1.0
        )));
    }
    let mut delta = first;
    for k in 2..=steps {
        let t = cap * k as f64 / steps as f64;
        if !holds(t) {
            break;
        }
        delta = t;
    }
    Ok(delta)
}

/// `1 + max(0, sup -Δf/Δφ)` over adjacent samples of `[a₋, a₊]`, where
/// `φ(t) = |t|^{p-2} t`; makes `t ↦ f(t) + c2 φ(t)` nondecreasing there.
pub fn estimate_c2(r: &Reaction, a_minus: f64, a_plus: f64, p: f64) -> f64 {
    let samples = 4001;
    let ts: Vec<f64> = (0..samples)
        .map(|k| a_minus + (a_plus - a_minus) * k as f64 / (samples - 1) as f64)
        .collect();
    let phi = |t: f64| t.abs().powf(p - 2.0) * t;
    let worst = ts
        .windows(2)
        .map(|w| {
            let df = r.f(0, w[1]) - r.f(0, w[0]);
            let dphi = phi(w[1]) - phi(w[0]);
            -df / dphi
        })
        .fold(0.0f64, f64::max);
    1.0 + worst
}
