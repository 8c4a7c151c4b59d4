use std::sync::Arc;

use log::info;
use serde::Serialize;

use stnp_core::ansatz::BoundaryData;
use stnp_core::metrics::{relative_l2, test_grid};
use stnp_core::par;
use stnp_core::reference::classical_cole_hopf;
use stnp_core::stnp::{run, ContractStats};
use stnp_core::timestepping::Scheme;

use super::{ansatz, initial_fn, problem, OracleData};
use crate::config::{Equation, RunConfig};
use crate::error::CliError;
use crate::output::{num, Output, Table};

const CLASSICAL_QUAD: usize = 20001;

#[derive(Debug, Clone, Serialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub seed: u64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// `(t, relative L² error)` at every error time reached.
    pub errors: Vec<(f64, f64)>,
    /// Cumulative time after each accepted step.
    pub step_times: Vec<f64>,
    pub contracts: ContractStats,
    pub failure: Option<String>,
}

impl SchemeSummary {
    pub fn error_at(&self, t: f64) -> Option<f64> {
        self.errors.iter().find(|(s, _)| *s == t).map(|(_, e)| *e)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FbennSummary {
    /// Largest relative change of the oracle under refinement.
    pub oracle_self_change: f64,
    /// Oracle vs classical Cole–Hopf, largest over the error times (sanity mode only).
    pub classical_diff: Option<f64>,
    pub runs: Vec<SchemeSummary>,
}

impl FbennSummary {
    pub fn runs_of(&self, scheme: Scheme) -> impl Iterator<Item = &SchemeSummary> {
        self.runs.iter().filter(move |r| r.scheme == scheme)
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::SspRk3 => "ssp_rk3",
        Scheme::Rk45 => "rk45",
    }
}

pub fn cmd_fbenn(cfg: &RunConfig, out: &Output) -> Result<FbennSummary, CliError> {
    cfg.check()?;
    if cfg.model.equation != Equation::Fbenn {
        return Err(CliError::Config("fbenn needs model.equation = fbenn".into()));
    }
    if cfg.fbenn.sanity && cfg.model.beta != 1.0 {
        return Err(CliError::Config("sanity mode compares against the classical solution and needs beta = 1".into()));
    }
    let (a, b) = (cfg.grid.a, cfg.grid.b);
    let times: Vec<f64> = cfg.fbenn.error_times.iter().copied().filter(|&t| t > 0.0 && t <= cfg.stepper.t_end).collect();
    let oracle = OracleData::load_or_build(cfg, out, &times)?;
    let tg = test_grid(a, b)?;
    let xs = tg.points();

    let mut check = Table::new("oracle_check", &["t", "self_change", "classical_diff"]);
    let mut classical_diff = None;
    for (k, &t) in times.iter().enumerate() {
        let self_change = relative_l2(&tg, &oracle.refined[k], &oracle.field[k])?;
        let cd = if cfg.fbenn.sanity {
            let c = classical_cole_hopf(&xs, t, cfg.model.epsilon, a, b, initial_fn(cfg.model.initial), CLASSICAL_QUAD)
                .map_err(CliError::numerical)?;
            let d = relative_l2(&tg, &c, &oracle.field[k])?;
            classical_diff = Some(classical_diff.map_or(d, |m: f64| m.max(d)));
            d
        } else {
            f64::NAN
        };
        check.push(vec![num(t), num(self_change), num(cd)]);
    }
    out.write(&check)?;
    let oracle_self_change = oracle.self_convergence(a, b)?;
    info!("fbenn: oracle self-change {oracle_self_change:.3e}");

    let boundary: Arc<dyn BoundaryData> = Arc::new(oracle.boundary_table()?);
    let seeds = if cfg.fbenn.ensemble_seeds.is_empty() {
        vec![cfg.ansatz.seed]
    } else {
        cfg.fbenn.ensemble_seeds.clone()
    };
    let mut jobs = Vec::new();
    for &scheme in &cfg.fbenn.schemes {
        for &seed in &seeds {
            let mut c = cfg.clone();
            c.stepper.scheme = scheme;
            let ans = ansatz(&c, &c.ansatz.hidden, seed, Some(boundary.clone()))?;
            jobs.push((scheme, seed, problem(&c, ans, c.grid.n)?));
        }
    }
    let u0 = initial_fn(cfg.model.initial);
    let runs: Vec<SchemeSummary> = par::run_jobs(jobs, |(scheme, seed, prob)| {
        let mut summary = SchemeSummary {
            scheme,
            seed,
            accepted_steps: 0,
            rejected_steps: 0,
            errors: Vec::new(),
            step_times: Vec::new(),
            contracts: ContractStats::default(),
            failure: None,
        };
        let result = match run(&prob, u0, &times, |_, _| {}) {
            Ok(r) => r,
            Err(e) => {
                summary.failure = Some(e.to_string());
                return summary;
            }
        };
        summary.accepted_steps = result.report.steps.len();
        summary.rejected_steps = result.report.rejected_steps;
        summary.step_times = result.report.steps.iter().map(|d| d.t).collect();
        summary.contracts = result.report.contracts;
        for (t, q) in &result.snapshots {
            let exact = oracle.field_at(*t).expect("oracle covers every error time");
            match prob.ansatz.values(q, &xs, *t).and_then(|u| relative_l2(&tg, exact, &u)) {
                Ok(e) => summary.errors.push((*t, e)),
                Err(e) => summary.failure = Some(e.to_string()),
            }
        }
        if let Some(e) = result.error {
            summary.failure = Some(e.to_string());
        }
        summary
    });

    let mut errors = Table::new("errors", &["scheme", "seed", "t", "error"]);
    let mut steps = Table::new("steps", &["scheme", "seed", "step", "t"]);
    for r in &runs {
        for (t, e) in &r.errors {
            errors.push(vec![scheme_name(r.scheme).into(), r.seed.to_string(), num(*t), num(*e)]);
        }
        for (k, t) in r.step_times.iter().enumerate() {
            steps.push(vec![scheme_name(r.scheme).into(), r.seed.to_string(), (k + 1).to_string(), num(*t)]);
        }
    }
    out.write(&errors)?;
    out.write(&steps)?;

    let mut band = Table::new("band", &["scheme", "t", "mean", "std", "members"]);
    for &scheme in &cfg.fbenn.schemes {
        for &t in &times {
            let v: Vec<f64> = runs.iter().filter(|r| r.scheme == scheme).filter_map(|r| r.error_at(t)).collect();
            if v.is_empty() {
                continue;
            }
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
            band.push(vec![scheme_name(scheme).into(), num(t), num(mean), num(var.sqrt()), v.len().to_string()]);
        }
    }
    out.write(&band)?;

    let summary = FbennSummary {
        oracle_self_change,
        classical_diff,
        runs,
    };
    #[derive(Serialize)]
    struct Brief<'a> {
        oracle_self_change: f64,
        classical_diff: Option<f64>,
        runs: Vec<BriefRun<'a>>,
    }
    #[derive(Serialize)]
    struct BriefRun<'a> {
        scheme: &'a str,
        seed: u64,
        accepted_steps: usize,
        rejected_steps: usize,
        final_error: Option<f64>,
        contracts: &'a ContractStats,
        failure: &'a Option<String>,
    }
    out.write_json(
        "summary.json",
        &Brief {
            oracle_self_change,
            classical_diff,
            runs: summary
                .runs
                .iter()
                .map(|r| BriefRun {
                    scheme: scheme_name(r.scheme),
                    seed: r.seed,
                    accepted_steps: r.accepted_steps,
                    rejected_steps: r.rejected_steps,
                    final_error: r.errors.last().map(|e| e.1),
                    contracts: &r.contracts,
                    failure: &r.failure,
                })
                .collect(),
        },
    )?;
    if let Some(r) = summary.runs.iter().find(|r| r.failure.is_some()) {
        return Err(CliError::Numerical(format!(
            "{} run (seed {}): {}",
            scheme_name(r.scheme),
            r.seed,
            r.failure.as_deref().unwrap_or_default()
        )));
    }
    Ok(summary)
}
