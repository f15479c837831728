//! End-to-end computation of the constant-sign, extremal and nodal
//! solutions of the example problem, with the diagnostics that go into a
//! [`SolutionReport`].

mod config;
mod export;
mod report;

use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::{first_eigenpair, EigenPair};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlocal::{energy, energy_gradient, residual_proxy};
use crate::reaction::{audit_hypotheses, AuditReport, PowerLaw, Reaction, SamplingPlan};
use crate::solvers::{
    minimize_energy, monotone_iteration, mountain_pass, mountain_pass_with, ordering_diagnostics,
    Direction, MountainPassOptions, SolveOutcome,
};

pub use config::{ReactionSpec, RunConfig};
pub use export::{export_report, write_csv, Manifest};
pub use report::{
    EigenSummary, ExtremalReport, ExtremalSide, NodalReport, OrderingChecks, SecondSolution,
    SolutionReport, SolutionSummary,
};

/// Maximum-norm gap below which the truncated minimization above `u₀` is
/// considered to have returned `u₀` itself.
const SAME_MINIMIZER: f64 = 1e-6;

/// Grid, first eigenpair, resolved reaction and its audit.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub cfg: RunConfig,
    pub grid: Grid,
    pub eigen: EigenPair,
    pub reaction: Reaction,
    pub audit: AuditReport,
}

/// Output of one sign branch, expressed for the positive side.
#[derive(Debug, Clone)]
struct Branch {
    first: SolveOutcome,
    second: SolveOutcome,
    how: SecondSolution,
}

#[derive(Debug, Clone)]
pub struct ConstantSign {
    pub u0: GridFunction,
    pub u1: GridFunction,
    pub v0: GridFunction,
    pub v1: GridFunction,
    pub summaries: [SolutionSummary; 4],
    pub second_positive: SecondSolution,
    pub second_negative: SecondSolution,
    pub ordering: OrderingChecks,
}

#[derive(Debug, Clone)]
pub struct Extremal {
    pub u_plus: GridFunction,
    pub v_minus: GridFunction,
    /// Minimizer of the auxiliary functional.
    pub aux: GridFunction,
    pub summaries: [SolutionSummary; 2],
    pub report: ExtremalReport,
}

#[derive(Debug, Clone)]
pub struct Nodal {
    pub u_tilde: GridFunction,
    pub summary: SolutionSummary,
    pub report: NodalReport,
}

/// A complete run: report plus the nodal values it describes.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: SolutionReport,
    pub grid: Grid,
    /// `(name, values)` for every exported grid function.
    pub solutions: Vec<(String, GridFunction)>,
}

impl Pipeline {
    /// Builds the grid, computes λ₁ and resolves and audits the reaction.
    /// Does not enforce the audit; see [`Pipeline::require_audit`].
    pub fn prepare(cfg: &RunConfig) -> Result<Pipeline> {
        let grid = cfg.grid()?;
        let m = GridFunction::constant(grid.n(), 1.0);
        let eigen = first_eigenpair(&grid, &m, cfg.tol_eigen)?;
        let reaction = cfg.reaction.build(cfg.p, eigen.lambda1)?;
        let audit = audit_hypotheses(&reaction, eigen.lambda1, &SamplingPlan::default());
        Ok(Pipeline {
            cfg: cfg.clone(),
            grid,
            eigen,
            reaction,
            audit,
        })
    }

    pub fn require_audit(&self) -> Result<()> {
        if self.audit.passed() || self.cfg.force {
            Ok(())
        } else {
            Err(Error::AuditFailed(self.audit.summary()))
        }
    }

    fn summarize(&self, out: &SolveOutcome, u: &GridFunction) -> SolutionSummary {
        let g = energy_gradient(&self.grid, &self.reaction, u);
        SolutionSummary {
            method: out.method,
            energy: energy(&self.grid, &self.reaction, u).total,
            residual: residual_proxy(&self.grid, &g),
            engine_energy: out.energy,
            engine_residual: out.residual,
            iterations: out.iterations,
            min: u.min_value(),
            max: u.max_value(),
        }
    }

    /// `e₁` scaled to maximum `level`.
    fn bump(&self, level: f64) -> GridFunction {
        self.eigen.e1.scaled(level / self.eigen.e1.max_value())
    }

    fn nontrivial(&self, label: &str, u: &GridFunction) -> Result<()> {
        let norm = u.max_norm();
        if norm < self.cfg.tol_order {
            Err(Error::Trivial {
                label: label.into(),
                norm,
            })
        } else {
            Ok(())
        }
    }

    /// Minimizer of the energy of `r` truncated to `[0, a₊]`.
    fn first_minimizer(&self, r: &Reaction) -> Result<SolveOutcome> {
        let start = self.bump(0.5 * r.params().a_plus);
        minimize_energy(
            &self.grid,
            &r.truncate_zero_aplus(),
            &start,
            self.cfg.tol_solve,
        )
    }

    /// `u₀`: minimizer of the energy truncated to `[0, a₊]`.
    pub fn minimize_u0(&self) -> Result<SolveOutcome> {
        self.first_minimizer(&self.reaction)
    }

    /// `u₊`: monotone limit from `τ₁ e₁` below `a₊`.
    pub fn smallest_positive(&self) -> Result<SolveOutcome> {
        let prm = *self.reaction.params();
        let (tau1, _) = self.subsolution_scales();
        let sub = self.eigen.e1.scaled(tau1);
        let sup = GridFunction::constant(self.grid.n(), prm.a_plus);
        monotone_iteration(
            &self.grid,
            &self.reaction,
            &sub,
            &sup,
            prm.c2,
            Direction::Up,
            self.cfg.tol_solve,
        )
    }

    /// First and second solution of constant sign for `r`, on the positive
    /// side.
    fn positive_branch(&self, r: &Reaction) -> Result<Branch> {
        let (grid, tol) = (&self.grid, self.cfg.tol_solve);
        let a_plus = r.params().a_plus;
        let first = self.first_minimizer(r)?;
        let u0 = &first.u;
        self.nontrivial("u0", u0)?;

        let upper = u0.map(|v| v.max(a_plus));
        let hat = r.truncate_interval(u0, &upper)?;
        let start = u0.scaled(0.5).axpy(0.5, &upper);
        let candidate = minimize_energy(grid, &hat, &start, tol)?;
        let gap = candidate.u.distance(u0);
        if gap > SAME_MINIMIZER {
            return Ok(Branch {
                first,
                second: candidate,
                how: SecondSolution::Minimizer { gap },
            });
        }

        let f1 = r.truncate_below(u0);
        let level = energy(grid, &f1, u0).total;
        let mut tau = 1.0;
        while !(energy(grid, &f1, &self.eigen.e1.scaled(tau)).total < level) {
            tau *= 2.0;
            if tau > 1e12 {
                return Err(Error::NoBarrier(
                    "energy does not decrease along the ray of e1".into(),
                ));
            }
        }
        let far = self.eigen.e1.scaled(tau);
        let second = mountain_pass(grid, &f1, u0, &far, self.cfg.path_points, tol)?;
        Ok(Branch {
            first,
            second,
            how: SecondSolution::MountainPass { gap, tau },
        })
    }

    pub fn run_constant_sign(&self) -> Result<ConstantSign> {
        let reflected = self.reaction.reflected();
        let (pos, neg) = rayon::join(
            || {
                self.positive_branch(&self.reaction)
                    .map_err(|e| e.in_branch("positive branch"))
            },
            || {
                self.positive_branch(&reflected)
                    .map_err(|e| e.in_branch("negative branch"))
            },
        );
        let (pos, neg) = (pos?, neg?);
        let u0 = pos.first.u.clone();
        let u1 = pos.second.u.clone();
        let v0 = neg.first.u.scaled(-1.0);
        let v1 = neg.second.u.scaled(-1.0);
        self.nontrivial("u1", &u1)?;
        self.nontrivial("v1", &v1)?;

        let prm = *self.reaction.params();
        let grid = &self.grid;
        let n = grid.n();
        let a_plus = GridFunction::constant(n, prm.a_plus);
        let a_minus = GridFunction::constant(n, prm.a_minus);
        let zero = GridFunction::zeros(n);
        let below_a_plus = ordering_diagnostics(grid, &u0, &a_plus)?;
        let tol = self.cfg.tol_order;
        let mut ordering = OrderingChecks {
            u0_positive: ordering_diagnostics(grid, &zero, &u0)?.min_gap,
            u0_below_a_plus: below_a_plus.min_gap,
            u0_below_a_plus_weighted: below_a_plus.min_weighted_gap,
            u0_below_u1: ordering_diagnostics(grid, &u0, &u1)?.min_gap,
            v0_negative: ordering_diagnostics(grid, &v0, &zero)?.min_gap,
            v0_above_a_minus: ordering_diagnostics(grid, &a_minus, &v0)?.min_gap,
            v1_below_v0: ordering_diagnostics(grid, &v1, &v0)?.min_gap,
            holds: false,
        };
        ordering.holds = ordering.u0_positive > 0.0
            && ordering.u0_below_a_plus > 0.0
            && ordering.u0_below_u1 >= -tol
            && ordering.v0_negative > 0.0
            && ordering.v0_above_a_minus > 0.0
            && ordering.v1_below_v0 >= -tol;
        for (label, lower, upper, margin) in [
            ("u0 <= u1", &u0, &u1, ordering.u0_below_u1),
            ("v1 <= v0", &v1, &v0, ordering.v1_below_v0),
        ] {
            if margin < -tol {
                let node = (0..n)
                    .min_by(|&i, &j| (upper[i] - lower[i]).total_cmp(&(upper[j] - lower[j])))
                    .unwrap_or(0);
                return Err(Error::Ordering {
                    node,
                    lower: lower[node],
                    upper: upper[node],
                }
                .in_branch(if label.starts_with('u') {
                    "positive branch"
                } else {
                    "negative branch"
                }));
            }
        }

        let mirror = |out: &SolveOutcome| SolveOutcome {
            u: out.u.scaled(-1.0),
            ..out.clone()
        };
        let summaries = [
            self.summarize(&pos.first, &u0),
            self.summarize(&pos.second, &u1),
            self.summarize(&mirror(&neg.first), &v0),
            self.summarize(&mirror(&neg.second), &v1),
        ];
        Ok(ConstantSign {
            u0,
            u1,
            v0,
            v1,
            summaries,
            second_positive: pos.how,
            second_negative: neg.how,
            ordering,
        })
    }

    /// Auxiliary minimizer `w` of `[u]^p / p - (c1 / q) h Σ (u⁺)^q`.
    pub fn auxiliary(&self) -> Result<SolveOutcome> {
        let prm = *self.reaction.params();
        let aux = Reaction::new(
            PowerLaw {
                c: prm.c1,
                q: prm.q,
            },
            prm,
        );
        let out = minimize_energy(&self.grid, &aux, &self.bump(prm.delta0), self.cfg.tol_solve)?;
        if !(out.energy < 0.0) {
            return Err(Error::Barrier(format!(
                "auxiliary minimum {:e} is not negative",
                out.energy
            )));
        }
        Ok(out)
    }

    /// `(τ₁, τ₂)`: `τ e₁` is a subsolution below `δ0` for both.
    pub fn subsolution_scales(&self) -> (f64, f64) {
        let prm = self.reaction.params();
        let lambda1 = self.eigen.lambda1;
        let cap = prm
            .delta0
            .min((prm.c1 / lambda1).powf(1.0 / (prm.p - prm.q)));
        let tau1 = 0.9 * cap / self.eigen.e1.max_value();
        (tau1, 0.5 * tau1)
    }

    /// Least solution in `[τ e₁, a₊]` for `r`, on the positive side, with
    /// the diagnostics of both subsolutions and the downward iteration.
    fn extremal_side(
        &self,
        r: &Reaction,
        barrier: &GridFunction,
        minimizer: &GridFunction,
    ) -> Result<(SolveOutcome, ExtremalSide)> {
        let (grid, tol) = (&self.grid, self.cfg.tol_solve);
        let prm = *r.params();
        let (tau1, tau2) = self.subsolution_scales();
        let sup = GridFunction::constant(grid.n(), prm.a_plus);
        let sub1 = self.eigen.e1.scaled(tau1);
        let sub2 = self.eigen.e1.scaled(tau2);
        let up1 = monotone_iteration(grid, r, &sub1, &sup, prm.c2, Direction::Up, tol)?;
        let up2 = monotone_iteration(grid, r, &sub2, &sup, prm.c2, Direction::Up, tol)?;
        let down = monotone_iteration(grid, r, &sub1, &sup, prm.c2, Direction::Down, tol)?;
        let gap = up1.u.distance(minimizer);
        let side = ExtremalSide {
            gap,
            identified: gap <= self.cfg.identify_tol,
            tau_gap: up1.u.distance(&up2.u),
            two_sided_gap: up1.u.distance(&down.u),
            barrier_margin: ordering_diagnostics(grid, barrier, &up1.u)?.min_gap,
            iterations: up1.iterations,
        };
        Ok((up1, side))
    }

    pub fn run_extremal(&self, cs: &ConstantSign) -> Result<Extremal> {
        let prm = *self.reaction.params();
        let aux = self
            .auxiliary()
            .map_err(|e| e.in_branch("auxiliary problem"))?;
        let aux_max = aux.u.max_value();
        let theta = (prm.delta0 / aux_max).min(0.99);
        let barrier = aux.u.scaled(theta);
        let reflected = self.reaction.reflected();
        let v0_mirror = cs.v0.scaled(-1.0);
        let (pos, neg) = rayon::join(
            || {
                self.extremal_side(&self.reaction, &barrier, &cs.u0)
                    .map_err(|e| e.in_branch("smallest positive solution"))
            },
            || {
                self.extremal_side(&reflected, &barrier, &v0_mirror)
                    .map_err(|e| e.in_branch("biggest negative solution"))
            },
        );
        let ((up, u_side), (vp, v_side)) = (pos?, neg?);
        let u_plus = up.u.clone();
        let v_minus = vp.u.scaled(-1.0);
        let (tau1, tau2) = self.subsolution_scales();
        let mirrored = SolveOutcome {
            u: v_minus.clone(),
            ..vp
        };
        Ok(Extremal {
            summaries: [
                self.summarize(&up, &u_plus),
                self.summarize(&mirrored, &v_minus),
            ],
            u_plus,
            v_minus,
            aux: aux.u.clone(),
            report: ExtremalReport {
                aux_energy: aux.energy,
                aux_max,
                theta,
                tau1,
                tau2,
                u_plus: u_side,
                v_minus: v_side,
            },
        })
    }

    /// Antisymmetric path perturbation with a little seeded noise; keeps the
    /// initial path away from the origin, which is a local maximum of the
    /// truncated energy.
    fn path_perturbation(&self, amplitude: f64) -> GridFunction {
        let (a, b) = self.cfg.domain;
        let centre = 0.5 * (a + b);
        let shape: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .zip(self.eigen.e1.iter())
            .map(|(x, e)| (x - centre) * e)
            .collect();
        let peak = shape.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let values = shape
            .iter()
            .map(|v| amplitude * (0.5 * v / peak + 1e-3 * rng.gen_range(-1.0..1.0)))
            .collect();
        GridFunction::from_vec_unchecked(values)
    }

    pub fn run_nodal(&self, cs: &ConstantSign, ex: &Extremal) -> Result<Nodal> {
        let grid = &self.grid;
        let tol = self.cfg.tol_solve;
        let tilde = self.reaction.truncate_interval(&ex.v_minus, &ex.u_plus)?;
        let amplitude = cs.u0.max_norm().max(cs.v0.max_norm());
        let mut opts = MountainPassOptions::new(self.cfg.path_points, tol);
        opts.perturbation = Some(self.path_perturbation(amplitude));
        let pass = mountain_pass_with(grid, &tilde, &cs.u0, &cs.v0, &opts)
            .map_err(|e| e.in_branch("nodal solution"))?;
        let u = pass.u.clone();
        let (lo, hi) = (u.min_value(), u.max_value());
        if !(lo < -self.cfg.tol_order && hi > self.cfg.tol_order) {
            return Err(Error::NonNodal { min: lo, max: hi });
        }

        let prm = self.reaction.params();
        let (plus, minus) = tilde.split_signs();
        let plus_min = minimize_energy(grid, &plus, &self.bump(0.5 * prm.a_plus), tol)
            .map_err(|e| e.in_branch("positive truncation"))?;
        let minus_min = minimize_energy(grid, &minus, &self.bump(0.5 * prm.a_minus), tol)
            .map_err(|e| e.in_branch("negative truncation"))?;

        let report = NodalReport {
            changes_sign: true,
            energy_u_tilde: pass.energy,
            energy_u0: energy(grid, &tilde, &cs.u0).total,
            energy_v0: energy(grid, &tilde, &cs.v0).total,
            above_v0: ordering_diagnostics(grid, &cs.v0, &u)?.min_gap,
            below_u0: ordering_diagnostics(grid, &u, &cs.u0)?.min_gap,
            plus_recovery_gap: plus_min.u.distance(&cs.u0),
            minus_recovery_gap: minus_min.u.distance(&cs.v0),
        };
        Ok(Nodal {
            summary: self.summarize(&pass, &u),
            u_tilde: u,
            report,
        })
    }

    /// Report skeleton with the eigen and reaction data filled in.
    pub fn base_report(&self) -> SolutionReport {
        let e1 = &self.eigen.e1;
        SolutionReport {
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.cfg.clone(),
            eigen: EigenSummary {
                lambda1: self.eigen.lambda1,
                residual: self.eigen.residual,
                iterations: self.eigen.iterations,
                e1_min: e1.min_value(),
                e1_max: e1.max_value(),
                e1_norm_p: self.grid.lebesgue_norm(e1, self.grid.p()),
            },
            params: *self.reaction.params(),
            audit: self.audit.clone(),
            u0: None,
            u1: None,
            v0: None,
            v1: None,
            u_tilde: None,
            u_plus: None,
            v_minus: None,
            second_positive: None,
            second_negative: None,
            ordering: None,
            extremal: None,
            nodal: None,
        }
    }
}

/// Runs the whole pipeline for `cfg`.
pub fn solve(cfg: &RunConfig) -> Result<Run> {
    let pipeline = Pipeline::prepare(cfg)?;
    pipeline.require_audit()?;
    let cs = pipeline.run_constant_sign()?;
    let ex = pipeline.run_extremal(&cs)?;
    let nodal = pipeline.run_nodal(&cs, &ex)?;

    let mut report = pipeline.base_report();
    let [u0, u1, v0, v1] = cs.summaries.clone();
    let [up, vm] = ex.summaries.clone();
    report.u0 = Some(u0);
    report.u1 = Some(u1);
    report.v0 = Some(v0);
    report.v1 = Some(v1);
    report.u_plus = Some(up);
    report.v_minus = Some(vm);
    report.u_tilde = Some(nodal.summary.clone());
    report.second_positive = Some(cs.second_positive);
    report.second_negative = Some(cs.second_negative);
    report.ordering = Some(cs.ordering.clone());
    report.extremal = Some(ex.report.clone());
    report.nodal = Some(nodal.report.clone());

    let solutions = vec![
        ("e1".to_string(), pipeline.eigen.e1.clone()),
        ("u0".to_string(), cs.u0),
        ("u1".to_string(), cs.u1),
        ("v0".to_string(), cs.v0),
        ("v1".to_string(), cs.v1),
        ("u_tilde".to_string(), nodal.u_tilde),
        ("u_plus".to_string(), ex.u_plus),
        ("v_minus".to_string(), ex.v_minus),
    ];
    Ok(Run {
        report,
        grid: pipeline.grid,
        solutions,
    })
}
