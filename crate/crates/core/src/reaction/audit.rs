//! Sampling-based audit of the structural hypotheses on a reaction.
//!
//! A passing verdict means "no violation found on the sampling plan"; it is
//! never a proof.

use serde::{Deserialize, Serialize};

use super::Reaction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `|f(x,t)| ≤ c0 (1 + |t|^{p-1})`.
    Growth,
    /// `η1 ≤ f(x,t)/(|t|^{p-2}t) ≤ η2` for large `|t|`, with `η1 > λ1`.
    AsymptoticSlope,
    /// `f(x,t) ≥ c1 t^{q-1}` on `[0, δ0]` and the mirrored bound.
    SublinearOrigin,
    /// `f(x,a₋) = f(x,0) = f(x,a₊) = 0` with `min(a₊, -a₋) > δ0`.
    Zeros,
    /// `t ↦ f(x,t) + c2 |t|^{p-2}t` nondecreasing on `[a₋, a₊]`.
    QuasiMonotone,
    /// `μ F(x,t) ≥ f(x,t) t` for `|t| ≤ δ0`.
    ReverseAmbrosettiRabinowitz,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 6] = [
        Hypothesis::Growth,
        Hypothesis::AsymptoticSlope,
        Hypothesis::SublinearOrigin,
        Hypothesis::Zeros,
        Hypothesis::QuasiMonotone,
        Hypothesis::ReverseAmbrosettiRabinowitz,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::Growth => "H1(i)",
            Hypothesis::AsymptoticSlope => "H1(ii)",
            Hypothesis::SublinearOrigin => "H1(iii)",
            Hypothesis::Zeros => "H1(iv)",
            Hypothesis::QuasiMonotone => "H1(v)",
            Hypothesis::ReverseAmbrosettiRabinowitz => "H2(vi)",
        }
    }
}

/// One violated inequality `lhs ≤ rhs`. Parameter-level violations carry
/// no sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: Option<usize>,
    pub t: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub hypothesis: Hypothesis,
    pub label: String,
    pub passed: bool,
    pub samples: usize,
    pub range: (f64, f64),
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub lambda1: f64,
    pub checks: Vec<CheckResult>,
    /// Largest `|t|` used by the asymptotic check.
    pub largest_t: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<Hypothesis> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.hypothesis)
            .collect()
    }

    pub fn check(&self, h: Hypothesis) -> &CheckResult {
        self.checks
            .iter()
            .find(|c| c.hypothesis == h)
            .expect("every hypothesis is checked")
    }

    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {}", c.label, if c.passed { "pass" } else { "FAIL" }))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Smallest `|t|` of the log-spaced grids near the origin.
    pub zero_floor: f64,
    /// Points per log-spaced grid near the origin.
    pub near_zero: usize,
    /// Points of the linear grid on `[a₋, a₊]`.
    pub interval: usize,
    /// Points per decade of the global growth grid.
    pub per_decade: usize,
    /// Largest `|t|` sampled.
    pub t_max: f64,
    /// `T`: the asymptotic-slope check uses `|t| ≥ T`.
    pub asymptotic_from: f64,
    /// Relative slack `ε∞` on the asymptotic slope bounds.
    pub asymptotic_slack: f64,
    /// Absolute slack of every pointwise inequality.
    pub slack: f64,
    /// Nodes at which the reaction is sampled.
    pub nodes: Vec<usize>,
}

impl Default for SamplingPlan {
    fn default() -> SamplingPlan {
        SamplingPlan {
            zero_floor: 1e-10,
            near_zero: 200,
            interval: 2001,
            per_decade: 20,
            t_max: 1e6,
            asymptotic_from: 1e3,
            asymptotic_slack: 1e-2,
            slack: 1e-10,
            nodes: vec![0],
        }
    }
}

const MAX_WITNESSES: usize = 8;

struct Collector {
    hypothesis: Hypothesis,
    samples: usize,
    lo: f64,
    hi: f64,
    witnesses: Vec<Witness>,
    violations: usize,
    worst: Option<(f64, Witness)>,
}

impl Collector {
    fn new(hypothesis: Hypothesis) -> Collector {
        Collector {
            hypothesis,
            samples: 0,
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
            witnesses: Vec::new(),
            violations: 0,
            worst: None,
        }
    }

    /// Records the sample and a witness if `lhs ≤ rhs + slack` fails.
    fn test(&mut self, node: usize, t: f64, lhs: f64, rhs: f64, slack: f64, relation: &str) {
        self.samples += 1;
        self.lo = self.lo.min(t);
        self.hi = self.hi.max(t);
        let excess = lhs - rhs;
        if excess > slack || !excess.is_finite() {
            self.violations += 1;
            let w = Witness {
                node: Some(node),
                t: Some(t),
                lhs,
                rhs,
                relation: relation.to_string(),
            };
            let severity = if excess.is_finite() {
                excess / rhs.abs().max(1.0)
            } else {
                f64::INFINITY
            };
            if self.worst.as_ref().is_none_or(|(s, _)| severity > *s) {
                self.worst = Some((severity, w.clone()));
            }
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }

    fn parameter(&mut self, ok: bool, lhs: f64, rhs: f64, relation: &str) {
        if !ok {
            self.violations += 1;
            self.witnesses.push(Witness {
                node: None,
                t: None,
                lhs,
                rhs,
                relation: relation.to_string(),
            });
        }
    }

    fn finish(mut self) -> CheckResult {
        if let Some((_, w)) = self.worst.take() {
            if !self.witnesses.contains(&w) {
                self.witnesses.push(w);
            }
        }
        let range = if self.samples == 0 {
            (0.0, 0.0)
        } else {
            (self.lo, self.hi)
        };
        CheckResult {
            hypothesis: self.hypothesis,
            label: self.hypothesis.label().to_string(),
            passed: self.violations == 0,
            samples: self.samples,
            range,
            witnesses: self.witnesses,
        }
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 || !(hi > lo) {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

fn decade_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    // Points 10^(k / per_decade), so that integer decades are hit exactly.
    let per = per_decade.max(1) as f64;
    let k0 = (lo.log10() * per).floor() as i64;
    let k1 = (hi.log10() * per).ceil() as i64;
    (k0..=k1)
        .map(|k| {
            if k % per_decade.max(1) as i64 == 0 {
                10f64.powi((k / per_decade.max(1) as i64) as i32)
            } else {
                10f64.powf(k as f64 / per)
            }
        })
        .filter(|&t| t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12))
        .collect()
}

fn signed_power(t: f64, e: f64) -> f64 {
    t.abs().powf(e) * t.signum()
}

/// Samples every hypothesis on the plan and reports violations with
/// witnesses.
pub fn audit_hypotheses(r: &Reaction, lambda1: f64, plan: &SamplingPlan) -> AuditReport {
    let prm = *r.params();
    let p = prm.p;
    let slack = plan.slack;
    let nodes: &[usize] = if plan.nodes.is_empty() {
        &[0]
    } else {
        &plan.nodes
    };

    let growth_grid: Vec<f64> = decade_grid(plan.zero_floor, plan.t_max, plan.per_decade);
    let interval_grid: Vec<f64> = (0..plan.interval.max(2))
        .map(|k| {
            prm.a_minus + (prm.a_plus - prm.a_minus) * k as f64 / (plan.interval.max(2) - 1) as f64
        })
        .collect();
    let delta = prm.delta0.max(0.0);
    let origin_grid: Vec<f64> = if delta > plan.zero_floor {
        log_grid(plan.zero_floor, delta, plan.near_zero)
    } else {
        Vec::new()
    };
    let large_grid: Vec<f64> = decade_grid(plan.asymptotic_from, plan.t_max, plan.per_decade);

    // H1(i)
    let mut growth = Collector::new(Hypothesis::Growth);
    growth.parameter(prm.c0 > 0.0, prm.c0, 0.0, "c0 > 0");
    for &node in nodes {
        for &t in growth_grid.iter().chain(&interval_grid) {
            for t in [t, -t] {
                let rhs = prm.c0 * (1.0 + t.abs().powf(p - 1.0));
                growth.test(
                    node,
                    t,
                    r.f(node, t).abs(),
                    rhs,
                    slack,
                    "|f(x,t)| <= c0 (1 + |t|^(p-1))",
                );
            }
        }
    }

    // H1(ii)
    let mut slope = Collector::new(Hypothesis::AsymptoticSlope);
    slope.parameter(
        prm.eta1 > lambda1,
        lambda1,
        prm.eta1,
        "lambda1 < eta1 (eta1 >= lambda1, eta1 != lambda1)",
    );
    slope.parameter(prm.eta1 <= prm.eta2, prm.eta1, prm.eta2, "eta1 <= eta2");
    let lo_bound = prm.eta1 - plan.asymptotic_slack * prm.eta1.abs().max(1.0);
    let hi_bound = prm.eta2 + plan.asymptotic_slack * prm.eta2.abs().max(1.0);
    for &node in nodes {
        for &t in &large_grid {
            for t in [t, -t] {
                let ratio = r.f(node, t) / signed_power(t, p - 1.0);
                slope.test(
                    node,
                    t,
                    lo_bound,
                    ratio,
                    0.0,
                    "eta1 - eps <= f/(|t|^(p-2)t)",
                );
                slope.test(
                    node,
                    t,
                    ratio,
                    hi_bound,
                    0.0,
                    "f/(|t|^(p-2)t) <= eta2 + eps",
                );
            }
        }
    }

    // H1(iii)
    let mut sub = Collector::new(Hypothesis::SublinearOrigin);
    sub.parameter(prm.q > 1.0 && prm.q < p, prm.q, p, "1 < q < p");
    sub.parameter(prm.c1 > 0.0, prm.c1, 0.0, "c1 > 0");
    sub.parameter(prm.delta0 > 0.0, prm.delta0, 0.0, "delta0 > 0");
    for &node in nodes {
        for &t in &origin_grid {
            let bound = prm.c1 * t.powf(prm.q - 1.0);
            sub.test(
                node,
                t,
                bound,
                r.f(node, t),
                slack,
                "c1 t^(q-1) <= f(x,t) on [0, delta0]",
            );
            sub.test(
                node,
                -t,
                r.f(node, -t),
                -bound,
                slack,
                "f(x,t) <= c1 |t|^(q-2) t on [-delta0, 0]",
            );
        }
    }

    // H1(iv)
    let mut zeros = Collector::new(Hypothesis::Zeros);
    zeros.parameter(
        prm.a_minus < 0.0 && prm.a_plus > 0.0,
        prm.a_minus,
        prm.a_plus,
        "a_minus < 0 < a_plus",
    );
    zeros.parameter(
        prm.a_plus.min(-prm.a_minus) > prm.delta0,
        prm.delta0,
        prm.a_plus.min(-prm.a_minus),
        "delta0 < min(a_plus, -a_minus)",
    );
    for &node in nodes {
        for t in [prm.a_minus, 0.0, prm.a_plus] {
            zeros.test(
                node,
                t,
                r.f(node, t).abs(),
                0.0,
                slack,
                "f(x,t) = 0 at t in {a_minus, 0, a_plus}",
            );
        }
    }

    // H1(v)
    let mut mono = Collector::new(Hypothesis::QuasiMonotone);
    mono.parameter(prm.c2 > 0.0, prm.c2, 0.0, "c2 > 0");
    for &node in nodes {
        let g = |t: f64| r.f(node, t) + prm.c2 * signed_power(t, p - 1.0);
        for w in interval_grid.windows(2) {
            mono.test(
                node,
                w[1],
                g(w[0]),
                g(w[1]),
                slack,
                "f + c2|t|^(p-2)t nondecreasing on [a_minus, a_plus]",
            );
        }
    }

    // H2(vi)
    let mut rar = Collector::new(Hypothesis::ReverseAmbrosettiRabinowitz);
    rar.parameter(prm.mu > 1.0 && prm.mu < p, prm.mu, p, "1 < mu < p");
    for &node in nodes {
        let linear = (0..=200).map(|k| delta * k as f64 / 200.0);
        for t in origin_grid.iter().copied().chain(linear) {
            for t in [t, -t] {
                let lhs = r.f(node, t) * t;
                let rhs = prm.mu * r.primitive(node, t);
                rar.test(
                    node,
                    t,
                    lhs,
                    rhs,
                    slack,
                    "f(x,t) t <= mu F(x,t) for |t| <= delta0",
                );
            }
        }
    }

    AuditReport {
        lambda1,
        checks: vec![
            growth.finish(),
            slope.finish(),
            sub.finish(),
            zeros.finish(),
            mono.finish(),
            rar.finish(),
        ],
        largest_t: large_grid.last().copied().unwrap_or(0.0),
    }
}
