use std::path::PathBuf;
use std::sync::Arc;

use log::info;
use serde::Serialize;

use stnp_core::ansatz::{write_checkpoint, BoundaryData, ParamVector};
use stnp_core::stnp::{run, RunReport};

use super::{ansatz, initial_fn, problem, snapshot_grid, time_tag, OracleData};
use crate::config::{Bc, Equation, RunConfig};
use crate::error::CliError;
use crate::output::{num, Output, Table};

#[derive(Debug, Clone)]
pub struct SolveSummary {
    pub report: RunReport,
    pub t: f64,
    pub q: ParamVector,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct SolveJson<'a> {
    t_reached: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    fit_mse: f64,
    initial_misfit: f64,
    energy0: f64,
    budget_violations: usize,
    min_budget_slack: f64,
    w1inf_max: f64,
    contracts: &'a stnp_core::stnp::ContractStats,
    error: Option<String>,
}

pub fn cmd_solve(cfg: &RunConfig, out: &Output) -> Result<SolveSummary, CliError> {
    cfg.check()?;
    let u0 = initial_fn(cfg.model.initial);
    let boundary: Option<Arc<dyn BoundaryData>> = if cfg.model.equation == Equation::Fbenn && cfg.ansatz.bc == Bc::Dirichlet {
        let oracle = OracleData::load_or_build(cfg, out, &[])?;
        Some(Arc::new(oracle.boundary_table()?))
    } else {
        None
    };
    let ans = ansatz(cfg, &cfg.ansatz.hidden, cfg.ansatz.seed, boundary)?;
    let prob = problem(cfg, ans.clone(), cfg.grid.n)?;

    let every = cfg.output.checkpoint_every;
    let mut io_err: Option<CliError> = None;
    let mut files = Vec::new();
    let mut step = 0usize;
    let result = run(&prob, u0, &cfg.output.snapshots, |q, d| {
        step += 1;
        if every > 0 && step % every == 0 && io_err.is_none() {
            let path = out.path(&format!("checkpoint_{step:06}.txt"));
            if let Err(e) = write_checkpoint(&path, ans.spec(), q, d.t) {
                io_err = Some(CliError::Config(format!("checkpoint: {e}")));
            }
        }
    })
    .map_err(CliError::numerical)?;
    if let Some(e) = io_err {
        return Err(e);
    }
    info!("solve: reached t = {} in {} steps", result.t, result.report.steps.len());

    let mut diag = Table::new(
        "diagnostics",
        &["t", "dt", "delta", "energy", "sigma_min", "sigma_max", "contraction", "trunc_proxy", "budget"],
    );
    let r = &result.report;
    let last = r.steps.len().saturating_sub(1);
    for (k, d) in r.steps.iter().enumerate() {
        if (k + 1) % cfg.output.cadence != 0 && k != last {
            continue;
        }
        diag.push(vec![
            num(d.t),
            num(d.dt),
            num(d.delta),
            num(d.energy),
            num(d.sigma_min),
            num(d.sigma_max),
            num(d.contraction),
            num(d.trunc_proxy),
            num(r.energy0 + r.budget(k)),
        ]);
    }
    files.push(out.write(&diag)?);

    let sg = snapshot_grid(cfg)?;
    let xs = sg.points();
    for (t, q) in &result.snapshots {
        let u = ans.values(q, &xs, *t).map_err(CliError::numerical)?;
        let mut tab = Table::new(&format!("snapshot_{}", time_tag(*t)), &["x", "u"]);
        for (x, v) in xs.iter().zip(&u) {
            tab.push(vec![num(*x), num(*v)]);
        }
        files.push(out.write(&tab)?);
    }
    let ck = out.path("checkpoint_final.txt");
    write_checkpoint(&ck, ans.spec(), &result.q, result.t).map_err(|e| CliError::Config(format!("checkpoint: {e}")))?;
    files.push(ck);
    files.push(out.write_json(
        "summary.json",
        &SolveJson {
            t_reached: result.t,
            accepted_steps: r.steps.len(),
            rejected_steps: r.rejected_steps,
            fit_mse: r.fit_mse,
            initial_misfit: r.e0,
            energy0: r.energy0,
            budget_violations: r.budget_violations,
            min_budget_slack: r.min_budget_slack,
            w1inf_max: r.w1inf_max,
            contracts: &r.contracts,
            error: result.error.as_ref().map(|e| e.to_string()),
        },
    )?);

    if let Some(e) = result.error {
        return Err(CliError::numerical(e));
    }
    Ok(SolveSummary {
        report: result.report,
        t: result.t,
        q: result.q,
        files,
    })
}
