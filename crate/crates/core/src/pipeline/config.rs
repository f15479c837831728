use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{validate_order, Grid};
use crate::reaction::{
    estimate_c2, estimate_delta0, example_reaction_p, find_negative_root, find_positive_root,
    Reaction, ReactionParams, TabulatedLaw,
};

/// Reaction selection. Example parameters left out are resolved from the
/// discrete first eigenvalue: `η = λ₁ + 1`, `γ = η + 3/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReactionSpec {
    Example {
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        gamma: Option<f64>,
    },
    /// Autonomous reaction given by samples; the zeros `a±` and `c2` are
    /// computed, `δ0` too unless given, the remaining constants are taken as
    /// given. The interpolant is linear at the origin, so the sublinearity
    /// check only passes on the sampled range.
    Tabulated {
        t: Vec<f64>,
        f: Vec<f64>,
        #[serde(default)]
        delta0: Option<f64>,
        c0: f64,
        c1: f64,
        q: f64,
        mu: f64,
        eta1: f64,
        eta2: f64,
    },
}

impl Default for ReactionSpec {
    fn default() -> ReactionSpec {
        ReactionSpec::Example {
            eta: None,
            gamma: None,
        }
    }
}

impl ReactionSpec {
    pub fn build(&self, p: f64, lambda1: f64) -> Result<Reaction> {
        match self {
            ReactionSpec::Example { eta, gamma } => {
                let eta = eta.unwrap_or(lambda1 + 1.0);
                let gamma = gamma.unwrap_or(eta + 1.5);
                example_reaction_p(eta, gamma, p)
            }
            ReactionSpec::Tabulated {
                t,
                f,
                delta0,
                c0,
                c1,
                q,
                mu,
                eta1,
                eta2,
            } => {
                let law = TabulatedLaw::new(t.clone(), f.clone())?;
                let mut params = ReactionParams {
                    p,
                    c0: *c0,
                    c1: *c1,
                    c2: 0.0,
                    delta0: 0.0,
                    q: *q,
                    a_minus: 0.0,
                    a_plus: 0.0,
                    mu: *mu,
                    eta1: *eta1,
                    eta2: *eta2,
                };
                let probe = Reaction::new(law, params);
                let hi = *t.last().unwrap();
                let lo = t[0];
                params.a_plus = find_positive_root(&probe, hi)?;
                params.a_minus = find_negative_root(&probe, lo)?;
                params.delta0 = match delta0 {
                    Some(d) => *d,
                    None => estimate_delta0(&probe, *c1, *q, params.a_plus)?,
                };
                params.c2 = estimate_c2(&probe, params.a_minus, params.a_plus, p);
                Ok(probe.with_params(params))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: (f64, f64),
    pub n: usize,
    pub p: f64,
    pub s: f64,
    pub reaction: ReactionSpec,
    pub tol_eigen: f64,
    pub tol_solve: f64,
    pub tol_order: f64,
    /// Max-norm gap below which an extremal solution is identified with the
    /// corresponding minimizer.
    pub identify_tol: f64,
    pub path_points: usize,
    pub seed: u64,
    /// Run even if the hypothesis audit fails.
    pub force: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            domain: (-1.0, 1.0),
            n: 200,
            p: 2.0,
            s: 0.4,
            reaction: ReactionSpec::default(),
            tol_eigen: 1e-10,
            tol_solve: 1e-8,
            tol_order: 1e-6,
            identify_tol: 1e-4,
            path_points: 41,
            seed: 0,
            force: false,
            out: None,
        }
    }
}

impl RunConfig {
    /// The degenerate regression instance `p = 3`, `s = 0.3`, `n = 120`.
    pub fn degenerate() -> RunConfig {
        RunConfig {
            n: 120,
            p: 3.0,
            s: 0.3,
            ..RunConfig::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        validate_order(self.p, self.s)?;
        let (a, b) = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain { a, b });
        }
        if self.n < 3 {
            return Err(Error::InvalidNodeCount(self.n));
        }
        for (name, v) in [
            ("tol_eigen", self.tol_eigen),
            ("tol_solve", self.tol_solve),
            ("tol_order", self.tol_order),
            ("identify_tol", self.identify_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive (got {v})")));
            }
        }
        if self.path_points < 3 {
            return Err(Error::Config(format!(
                "path_points must be at least 3 (got {})",
                self.path_points
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        self.validate()?;
        Grid::new(self.domain.0, self.domain.1, self.n, self.p, self.s)
    }

    /// SHA-256 of the canonical JSON encoding, without the output directory.
    pub fn digest(&self) -> String {
        let canonical = RunConfig {
            out: None,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
