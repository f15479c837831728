use super::ReactionLaw;
use crate::error::{Error, Result};

/// Reaction given by samples `(t_k, f_k)`, interpolated by a monotone
/// piecewise cubic (Fritsch-Carlson) and extended linearly with the end
/// slopes. The primitive integrates the Hermite cubics exactly.
#[derive(Debug, Clone)]
pub struct TabulatedLaw {
    t: Vec<f64>,
    f: Vec<f64>,
    d: Vec<f64>,
    /// `∫_0^{t_k} f`.
    cumulative: Vec<f64>,
}

impl TabulatedLaw {
    pub fn new(t: Vec<f64>, f: Vec<f64>) -> Result<TabulatedLaw> {
        if t.len() != f.len() || t.len() < 2 {
            return Err(Error::Config(
                "tabulated reaction needs at least two (t, f) pairs of equal length".into(),
            ));
        }
        if t.iter().chain(&f).any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "tabulated reaction has non-finite entries".into(),
            ));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "tabulated reaction abscissae must be strictly increasing".into(),
            ));
        }
        if !(t[0] <= 0.0 && *t.last().unwrap() >= 0.0) {
            return Err(Error::Config("tabulated reaction must cover t = 0".into()));
        }

        let m = t.len();
        let secant: Vec<f64> = (0..m - 1)
            .map(|k| (f[k + 1] - f[k]) / (t[k + 1] - t[k]))
            .collect();
        let mut d = vec![0.0; m];
        d[0] = secant[0];
        d[m - 1] = secant[m - 2];
        for k in 1..m - 1 {
            d[k] = if secant[k - 1] * secant[k] <= 0.0 {
                0.0
            } else {
                0.5 * (secant[k - 1] + secant[k])
            };
        }
        for k in 0..m - 1 {
            if secant[k] == 0.0 {
                d[k] = 0.0;
                d[k + 1] = 0.0;
                continue;
            }
            let alpha = d[k] / secant[k];
            let beta = d[k + 1] / secant[k];
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                d[k] = tau * alpha * secant[k];
                d[k + 1] = tau * beta * secant[k];
            }
        }

        let mut law = TabulatedLaw {
            t,
            f,
            d,
            cumulative: vec![0.0; m],
        };
        for k in 1..m {
            law.cumulative[k] = law.cumulative[k - 1] + law.segment_integral(k - 1, 1.0);
        }
        let zero = law.raw_primitive(0.0);
        for c in &mut law.cumulative {
            *c -= zero;
        }
        Ok(law)
    }

    fn segment(&self, t: f64) -> usize {
        match self.t.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(self.t.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.t.len() - 2),
        }
    }

    /// `∫_{t_k}^{t_k + u Δ}` of the Hermite cubic on segment `k`.
    fn segment_integral(&self, k: usize, u: f64) -> f64 {
        let dt = self.t[k + 1] - self.t[k];
        let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
        let h00 = 0.5 * u4 - u3 + u;
        let h10 = 0.25 * u4 - 2.0 * u3 / 3.0 + 0.5 * u2;
        let h01 = -0.5 * u4 + u3;
        let h11 = 0.25 * u4 - u3 / 3.0;
        dt * (h00 * self.f[k]
            + h10 * dt * self.d[k]
            + h01 * self.f[k + 1]
            + h11 * dt * self.d[k + 1])
    }

    /// Primitive with the (not yet normalized) cumulative offsets.
    fn raw_primitive(&self, t: f64) -> f64 {
        let last = self.t.len() - 1;
        if t < self.t[0] {
            let dt = t - self.t[0];
            return self.cumulative[0] + self.f[0] * dt + 0.5 * self.d[0] * dt * dt;
        }
        if t > self.t[last] {
            let dt = t - self.t[last];
            return self.cumulative[last] + self.f[last] * dt + 0.5 * self.d[last] * dt * dt;
        }
        let k = self.segment(t);
        let u = (t - self.t[k]) / (self.t[k + 1] - self.t[k]);
        self.cumulative[k] + self.segment_integral(k, u)
    }
}

impl ReactionLaw for TabulatedLaw {
    fn value(&self, _node: usize, t: f64) -> f64 {
        let last = self.t.len() - 1;
        if t < self.t[0] {
            return self.f[0] + self.d[0] * (t - self.t[0]);
        }
        if t > self.t[last] {
            return self.f[last] + self.d[last] * (t - self.t[last]);
        }
        let k = self.segment(t);
        let dt = self.t[k + 1] - self.t[k];
        let u = (t - self.t[k]) / dt;
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.f[k]
            + (u3 - 2.0 * u2 + u) * dt * self.d[k]
            + (-2.0 * u3 + 3.0 * u2) * self.f[k + 1]
            + (u3 - u2) * dt * self.d[k + 1]
    }

    fn primitive(&self, _node: usize, t: f64) -> f64 {
        self.raw_primitive(t)
    }

    fn slope(&self, _node: usize, t: f64) -> f64 {
        let last = self.t.len() - 1;
        if t < self.t[0] {
            return self.d[0];
        }
        if t > self.t[last] {
            return self.d[last];
        }
        let k = self.segment(t);
        let dt = self.t[k + 1] - self.t[k];
        let u = (t - self.t[k]) / dt;
        let u2 = u * u;
        ((6.0 * u2 - 6.0 * u) * self.f[k]
            + (3.0 * u2 - 4.0 * u + 1.0) * dt * self.d[k]
            + (-6.0 * u2 + 6.0 * u) * self.f[k + 1]
            + (3.0 * u2 - 2.0 * u) * dt * self.d[k + 1])
            / dt
    }
}
