use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fracpl::pipeline::{self, export_report, write_csv, Pipeline, ReactionSpec, RunConfig};
use fracpl::solvers::SolveOutcome;
use fracpl::{Error, ErrorClass};
use serde_json::json;

/// Solutions of the Dirichlet problem for the fractional p-Laplacian on an
/// interval.
#[derive(Debug, Parser)]
#[command(name = "fracpl", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// First eigenpair with weight 1; prints λ₁ and writes e1.csv.
    Eigen,
    /// Checks the structural hypotheses of the reaction; prints JSON.
    Audit,
    /// Full pipeline: report.json, one CSV per solution, manifest.json.
    Solve,
    /// Minimizer u0 of the energy truncated to [0, a+].
    Minimize,
    /// Sign-changing mountain-pass solution between u0 and v0.
    MountainPass,
    /// Smallest positive solution by monotone iteration.
    Monotone,
}

#[derive(Debug, Args)]
struct Options {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Interval endpoints, e.g. `-1,1`.
    #[arg(long, global = true, value_parser = parse_domain, allow_hyphen_values = true)]
    domain: Option<(f64, f64)>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Gradient-proxy tolerance of the solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    path_points: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Continue when the hypothesis audit fails.
    #[arg(long, global = true)]
    force: bool,
}

fn parse_domain(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `a,b`, got `{text}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

impl Options {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(d) = self.domain {
            cfg.domain = d;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(s) = self.s {
            cfg.s = s;
        }
        if let Some(tol) = self.tol {
            cfg.tol_solve = tol;
        }
        if let Some(m) = self.path_points {
            cfg.path_points = m;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.force |= self.force;
        if self.eta.is_some() || self.gamma.is_some() {
            match &mut cfg.reaction {
                ReactionSpec::Example { eta, gamma } => {
                    if self.eta.is_some() {
                        *eta = self.eta;
                    }
                    if self.gamma.is_some() {
                        *gamma = self.gamma;
                    }
                }
                ReactionSpec::Tabulated { .. } => {
                    return Err(Error::Config(
                        "--eta/--gamma only apply to the example reaction".into(),
                    ))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Audit => 2,
        ErrorClass::Solver => 3,
        ErrorClass::InvalidConfig => 4,
        ErrorClass::Io => 1,
    }
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn outcome_json(label: &str, out: &SolveOutcome) -> serde_json::Value {
    json!({
        "solution": label,
        "method": out.method,
        "energy": out.energy,
        "residual": out.residual,
        "iterations": out.iterations,
        "min": out.u.min_value(),
        "max": out.u.max_value(),
    })
}

fn write_solution(
    dir: Option<&Path>,
    name: &str,
    nodes: &[f64],
    u: &fracpl::GridFunction,
) -> anyhow::Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_csv(&dir.join(format!("{name}.csv")), nodes, u)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.opts.config()?;
    let out = cfg.out.clone();
    let out = out.as_deref();
    match cli.command {
        Command::Eigen => {
            let grid = cfg.grid()?;
            let m = fracpl::GridFunction::constant(grid.n(), 1.0);
            let pair = fracpl::eigen::first_eigenpair(&grid, &m, cfg.tol_eigen)?;
            write_solution(out, "e1", grid.nodes(), &pair.e1)?;
            print_json(&json!({
                "lambda1": pair.lambda1,
                "residual": pair.residual,
                "iterations": pair.iterations,
                "e1_min": pair.e1.min_value(),
                "e1_norm_p": grid.lebesgue_norm(&pair.e1, grid.p()),
            }))
        }
        Command::Audit => {
            let pipeline = Pipeline::prepare(&cfg)?;
            print_json(&serde_json::to_value(&pipeline.audit)?)?;
            if pipeline.audit.passed() {
                Ok(())
            } else {
                Err(Error::AuditFailed(pipeline.audit.summary()).into())
            }
        }
        Command::Solve => {
            let run = pipeline::solve(&cfg)?;
            match out {
                Some(dir) => {
                    let files = export_report(&run.report, run.grid.nodes(), &run.solutions, dir)?;
                    let names: Vec<String> =
                        files.iter().map(|p| p.display().to_string()).collect();
                    print_json(&json!({
                        "lambda1": run.report.eigen.lambda1,
                        "u0": run.report.u0,
                        "u1": run.report.u1,
                        "v0": run.report.v0,
                        "v1": run.report.v1,
                        "u_tilde": run.report.u_tilde,
                        "files": names,
                    }))
                }
                None => print_json(&serde_json::to_value(&run.report)?),
            }
        }
        Command::Minimize => {
            let pipeline = Pipeline::prepare(&cfg)?;
            pipeline.require_audit()?;
            let res = pipeline.minimize_u0()?;
            write_solution(out, "u0", pipeline.grid.nodes(), &res.u)?;
            print_json(&outcome_json("u0", &res))
        }
        Command::MountainPass => {
            let pipeline = Pipeline::prepare(&cfg)?;
            pipeline.require_audit()?;
            let cs = pipeline.run_constant_sign()?;
            let ex = pipeline.run_extremal(&cs)?;
            let nodal = pipeline.run_nodal(&cs, &ex)?;
            write_solution(out, "u_tilde", pipeline.grid.nodes(), &nodal.u_tilde)?;
            print_json(&json!({
                "solution": "u_tilde",
                "summary": nodal.summary,
                "diagnostics": nodal.report,
            }))
        }
        Command::Monotone => {
            let pipeline = Pipeline::prepare(&cfg)?;
            pipeline.require_audit()?;
            let res = pipeline.smallest_positive()?;
            write_solution(out, "u_plus", pipeline.grid.nodes(), &res.u)?;
            print_json(&outcome_json("u_plus", &res))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let class = err
                .downcast_ref::<Error>()
                .map(Error::class)
                .unwrap_or(ErrorClass::Io);
            ExitCode::from(exit_code(class))
        }
    }
}
