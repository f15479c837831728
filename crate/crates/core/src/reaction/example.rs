use super::{
    estimate_c2, estimate_delta0, find_negative_root, find_positive_root, Reaction, ReactionLaw,
    ReactionParams,
};
use crate::error::{Error, Result};

/// `f(t) = (η t^p - γ t^{p-1} + √t) / (t + 1)` for `t ≥ 0`, extended as an
/// odd function. For `p = 2` this is the classical autonomous example with
/// sublinear growth `√t` at the origin and asymptotic slope `η`.
#[derive(Debug, Clone)]
pub struct ExampleLaw {
    eta: f64,
    gamma: f64,
    p: f64,
    /// For integer `p`: `η t^p - γ t^{p-1} = (t + 1) Q(t) + R` with
    /// `Q = Σ quotient[k] t^k`.
    division: Option<(Vec<f64>, f64)>,
}

impl ExampleLaw {
    pub fn new(eta: f64, gamma: f64, p: f64) -> ExampleLaw {
        let division = if p.fract() == 0.0 && p <= 64.0 {
            let degree = p as usize;
            let mut coeffs = vec![0.0; degree + 1];
            coeffs[degree] = eta;
            coeffs[degree - 1] = -gamma;
            // Synthetic division by (t - r), r = -1.
            let mut quotient = vec![0.0; degree];
            let mut carry = 0.0;
            for k in (0..degree).rev() {
                carry = coeffs[k + 1] - carry;
                quotient[k] = carry;
            }
            let remainder = coeffs[0] - carry;
            Some((quotient, remainder))
        } else {
            None
        };
        ExampleLaw {
            eta,
            gamma,
            p,
            division,
        }
    }

    fn value_pos(&self, t: f64) -> f64 {
        let num = self.eta * t.powf(self.p) - self.gamma * t.powf(self.p - 1.0) + t.sqrt();
        num / (t + 1.0)
    }

    fn primitive_pos(&self, t: f64) -> f64 {
        match &self.division {
            Some((quotient, remainder)) => {
                // The constant quotient coefficient equals -R, so the linear
                // term pairs with R ln(1 + t) to avoid cancellation.
                let poly: f64 = quotient
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| c * t.powi(k as i32 + 1) / (k as f64 + 1.0))
                    .sum();
                poly + remainder * log1p_minus_id(t) + 2.0 * id_minus_atan(t.sqrt())
            }
            None => self.primitive_quadrature(t),
        }
    }

    /// `∫_0^t f = ∫_0^{√t} 2r f(r²) dr`; the substitution removes the
    /// square-root singularity.
    pub(crate) fn primitive_quadrature(&self, t: f64) -> f64 {
        let g = |r: f64| 2.0 * r * self.value_pos(r * r);
        adaptive_simpson(&g, 0.0, t.sqrt(), 1e-14 * (1.0 + t * t), 48)
    }

    fn slope_pos(&self, t: f64) -> f64 {
        let t = t.max(f64::MIN_POSITIVE);
        let p = self.p;
        let num = self.eta * t.powf(p) - self.gamma * t.powf(p - 1.0) + t.sqrt();
        let dnum = p * self.eta * t.powf(p - 1.0) - (p - 1.0) * self.gamma * t.powf(p - 2.0)
            + 0.5 / t.sqrt();
        (dnum * (t + 1.0) - num) / ((t + 1.0) * (t + 1.0))
    }
}

impl ReactionLaw for ExampleLaw {
    fn value(&self, _node: usize, t: f64) -> f64 {
        if t < 0.0 {
            -self.value_pos(-t)
        } else {
            self.value_pos(t)
        }
    }

    fn primitive(&self, _node: usize, t: f64) -> f64 {
        self.primitive_pos(t.abs())
    }

    fn slope(&self, _node: usize, t: f64) -> f64 {
        self.slope_pos(t.abs())
    }
}

/// `ln(1 + t) - t`.
fn log1p_minus_id(t: f64) -> f64 {
    if t.abs() < 0.05 {
        let mut term = t;
        let mut sum = 0.0;
        for k in 2..40 {
            term *= -t;
            sum += term / k as f64;
        }
        sum
    } else {
        t.ln_1p() - t
    }
}

/// `r - arctan(r)`.
fn id_minus_atan(r: f64) -> f64 {
    if r.abs() < 0.1 {
        let r2 = r * r;
        let mut term = r;
        let mut sum = 0.0;
        for k in 1..30 {
            term *= -r2;
            sum -= term / (2 * k + 1) as f64;
        }
        sum
    } else {
        r - r.atan()
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// The example reaction for `p = 2`.
pub fn example_reaction(eta: f64, gamma: f64) -> Result<Reaction> {
    example_reaction_p(eta, gamma, 2.0)
}

/// The example reaction for a general exponent `p ≥ 2`, with all hypothesis
/// constants resolved numerically: `q = 3/2`, `c1 = 1/2`, `μ = 7/4`,
/// `c0 = η + γ + 1`, `η1 = η2 = η`, `a±` by bisection, `δ0` and `c2` by
/// scanning.
pub fn example_reaction_p(eta: f64, gamma: f64, p: f64) -> Result<Reaction> {
    if !(eta.is_finite() && gamma.is_finite() && eta > 0.0) {
        return Err(Error::ParameterConstraint(format!(
            "eta must be positive and finite (got {eta})"
        )));
    }
    if !(gamma > eta + 1.0) {
        return Err(Error::ParameterConstraint(format!(
            "gamma > eta + 1 required (got eta = {eta}, gamma = {gamma})"
        )));
    }
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidOrder { p, s: f64::NAN });
    }
    let (q, c1, mu) = (1.5, 0.5, 1.75);
    let mut params = ReactionParams {
        p,
        c0: eta + gamma + 1.0,
        c1,
        c2: 0.0,
        delta0: 0.0,
        q,
        a_minus: 0.0,
        a_plus: 0.0,
        mu,
        eta1: eta,
        eta2: eta,
    };
    let probe = Reaction::new(ExampleLaw::new(eta, gamma, p), params);
    // f(1) = (η - γ + 1)/2 < 0, so the first zero lies in (0, 1).
    params.a_plus = find_positive_root(&probe, 1.0)?;
    params.a_minus = find_negative_root(&probe, -1.0)?;
    params.delta0 = estimate_delta0(&probe, c1, q, params.a_plus)?;
    params.c2 = estimate_c2(&probe, params.a_minus, params.a_plus, p);
    Ok(probe.with_params(params))
}
