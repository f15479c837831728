use std::fmt;

use super::ReactionLaw;

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Autonomous reaction given by closures for `f` and its primitive.
pub struct FnLaw {
    name: String,
    f: ScalarFn,
    primitive: ScalarFn,
    slope: Option<ScalarFn>,
}

impl FnLaw {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        primitive: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> FnLaw {
        FnLaw {
            name: name.into(),
            f: Box::new(f),
            primitive: Box::new(primitive),
            slope: None,
        }
    }

    pub fn with_slope(mut self, slope: impl Fn(f64) -> f64 + Send + Sync + 'static) -> FnLaw {
        self.slope = Some(Box::new(slope));
        self
    }
}

impl fmt::Debug for FnLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnLaw({})", self.name)
    }
}

impl ReactionLaw for FnLaw {
    fn value(&self, _node: usize, t: f64) -> f64 {
        (self.f)(t)
    }

    fn primitive(&self, _node: usize, t: f64) -> f64 {
        (self.primitive)(t)
    }

    fn slope(&self, node: usize, t: f64) -> f64 {
        match &self.slope {
            Some(d) => d(t),
            None => {
                let step = 1e-7 * t.abs().max(1e-3);
                (self.value(node, t + step) - self.value(node, t - step)) / (2.0 * step)
            }
        }
    }
}

/// `f(x_i, t) = source_i - shift |t|^{p-2} t`.
///
/// The energy of this reaction is strictly convex for `shift >= 0`; it is
/// the inner problem of the monotone iteration and of the inverse power
/// method.
#[derive(Debug, Clone)]
pub struct SourceLaw {
    source: Vec<f64>,
    shift: f64,
    p: f64,
}

impl SourceLaw {
    pub fn new(source: Vec<f64>, shift: f64, p: f64) -> SourceLaw {
        SourceLaw { source, shift, p }
    }
}

impl ReactionLaw for SourceLaw {
    fn value(&self, node: usize, t: f64) -> f64 {
        self.source[node] - self.shift * crate::nonlocal::phi(t, self.p)
    }

    fn primitive(&self, node: usize, t: f64) -> f64 {
        self.source[node] * t - self.shift * crate::nonlocal::abs_pow(t, self.p) / self.p
    }

    fn slope(&self, _node: usize, t: f64) -> f64 {
        -self.shift * (self.p - 1.0) * crate::nonlocal::abs_pow(t, self.p - 2.0)
    }
}

/// `f(t) = c (t⁺)^{q-1}`, the reaction of the auxiliary problem.
#[derive(Debug, Clone, Copy)]
pub struct PowerLaw {
    pub c: f64,
    pub q: f64,
}

impl ReactionLaw for PowerLaw {
    fn value(&self, _node: usize, t: f64) -> f64 {
        if t > 0.0 {
            self.c * t.powf(self.q - 1.0)
        } else {
            0.0
        }
    }

    fn primitive(&self, _node: usize, t: f64) -> f64 {
        if t > 0.0 {
            self.c * t.powf(self.q) / self.q
        } else {
            0.0
        }
    }

    fn slope(&self, _node: usize, t: f64) -> f64 {
        if t > 0.0 {
            self.c * (self.q - 1.0) * t.max(f64::MIN_POSITIVE).powf(self.q - 2.0)
        } else {
            0.0
        }
    }
}
