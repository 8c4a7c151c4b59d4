//! The subcommands. Each takes a checked config and an output directory and returns
//! a summary of what it computed; the binary maps errors to exit codes.

mod compare;
mod convergence;
mod fbenn;
mod oracle;
mod solve;

use std::f64::consts::PI;
use std::sync::Arc;

use stnp_core::ansatz::{Ansatz, AnsatzSpec, BoundaryData, BoundaryWrapper, FeatureMap};
use stnp_core::fracops::UniformGrid;
use stnp_core::models::{manufactured_exact, FbeflConfig, FbennConfig, Model};
use stnp_core::stnp::StnpProblem;

use crate::config::{Bc, Equation, Initial, RunConfig};
use crate::error::CliError;

pub use compare::{cmd_compare, CompareSummary};
pub use convergence::{cmd_convergence, ConvergenceRow};
pub use fbenn::{cmd_fbenn, FbennSummary, SchemeSummary};
pub use oracle::{cmd_oracle_cache, OracleData};
pub use solve::{cmd_solve, SolveSummary};

pub type InitialFn = fn(f64) -> f64;

fn neg_sin_pi(x: f64) -> f64 {
    -(PI * x).sin()
}

fn manufactured_initial(x: f64) -> f64 {
    manufactured_exact(x, 0.0)
}

pub fn initial_fn(i: Initial) -> InitialFn {
    match i {
        Initial::NegSinPi => neg_sin_pi,
        Initial::Manufactured => manufactured_initial,
    }
}

pub fn model(cfg: &RunConfig) -> Model {
    let m = &cfg.model;
    match m.equation {
        Equation::Fbefl if m.forcing => Model::Fbefl(FbeflConfig::manufactured(m.alpha, m.epsilon, m.gl_order)),
        Equation::Fbefl => Model::Fbefl(FbeflConfig::new(m.alpha, m.epsilon, m.gl_order)),
        Equation::Fbenn => Model::Fbenn(FbennConfig {
            beta: m.beta,
            epsilon: m.epsilon,
        }),
    }
}

pub fn ansatz(cfg: &RunConfig, hidden: &[usize], seed: u64, boundary: Option<Arc<dyn BoundaryData>>) -> Result<Ansatz, CliError> {
    let (a, b) = (cfg.grid.a, cfg.grid.b);
    let mut spec = AnsatzSpec::dirichlet(hidden, a, b, seed);
    if cfg.ansatz.bc == Bc::None {
        spec.bc = BoundaryWrapper::None;
        spec.feature_map = FeatureMap::Identity;
    }
    Ok(match boundary {
        Some(bd) => Ansatz::with_boundary(spec, bd)?,
        None => Ansatz::new(spec)?,
    })
}

pub fn problem(cfg: &RunConfig, ansatz: Ansatz, n: usize) -> Result<StnpProblem, CliError> {
    let p = StnpProblem {
        model: model(cfg),
        ansatz,
        grid: UniformGrid::new(cfg.grid.a, cfg.grid.b, n)?,
        projection: cfg.projection.clone(),
        stepper: cfg.stepper.clone(),
        fit: cfg.fit.optimizer.clone(),
        fit_points: cfg.fit.points,
        diagnostics: cfg.diagnostics,
    };
    p.validate()?;
    Ok(p)
}

/// Uniform fit samples on `[a, b]`, hitting `b` exactly.
pub fn fit_samples(a: f64, b: f64, n: usize, u0: InitialFn) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    let ys = xs.iter().map(|&x| u0(x)).collect();
    (xs, ys)
}

/// The snapshot grid of the output section.
pub fn snapshot_grid(cfg: &RunConfig) -> Result<UniformGrid, CliError> {
    Ok(UniformGrid::new(cfg.grid.a, cfg.grid.b, cfg.output.snapshot_points)?)
}

fn time_tag(t: f64) -> String {
    format!("t{t:.4}")
}
