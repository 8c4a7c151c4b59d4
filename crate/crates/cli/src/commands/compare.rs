use serde::Serialize;

use stnp_core::fracops::UniformGrid;
use stnp_core::metrics::{relative_l2, test_grid};
use stnp_core::models::Model;
use stnp_core::reference::{central_diff_fbefl, total_variation, upwind_fbefl, FdTrajectory};
use stnp_core::stnp::{run, ContractStats};

use super::{ansatz, initial_fn, problem};
use crate::config::{Equation, RunConfig};
use crate::error::CliError;
use crate::output::{interp_linear, num, Output, Table};

/// Per snapshot time: total variations and relative L² distances to the upwind reference.
#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub tv_central: f64,
    pub tv_upwind: f64,
    pub tv_stnp: f64,
    pub l2_central_upwind: f64,
    pub l2_stnp_upwind: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub rows: Vec<CompareRow>,
    pub central_blow_up: Option<f64>,
    pub upwind_blow_up: Option<f64>,
    pub stnp_steps: usize,
    pub stnp_contracts: ContractStats,
}

impl CompareSummary {
    pub fn at(&self, t: f64) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.t == t)
    }
}

fn fd_at<'a>(traj: &'a FdTrajectory, t: f64) -> Option<&'a [f64]> {
    traj.times.iter().position(|&s| s == t).map(|k| traj.snapshots[k].as_slice())
}

/// STNP, central differences and Godunov upwind on the same FBEFL problem.
pub fn cmd_compare(cfg: &RunConfig, out: &Output) -> Result<CompareSummary, CliError> {
    cfg.check()?;
    if cfg.model.equation != Equation::Fbefl {
        return Err(CliError::Config("compare needs model.equation = fbefl".into()));
    }
    let cc = &cfg.compare;
    if cc.central_nodes < 3 || cc.upwind_nodes < 3 || !(cc.dt > 0.0) {
        return Err(CliError::Config("compare needs >= 3 nodes per grid and dt > 0".into()));
    }
    let Model::Fbefl(fcfg) = super::model(cfg) else {
        unreachable!("equation checked above")
    };
    let (a, b) = (cfg.grid.a, cfg.grid.b);
    let u0 = initial_fn(cfg.model.initial);
    let mut times = cfg.output.snapshots.clone();
    times.push(cfg.stepper.t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let gc = UniformGrid::new(a, b, cc.central_nodes)?;
    let gu = UniformGrid::new(a, b, cc.upwind_nodes)?;
    let xc = gc.points();
    let xu = gu.points();
    let sample = |xs: &[f64]| xs.iter().map(|&x| u0(x)).collect::<Vec<_>>();
    let central = central_diff_fbefl(&gc, &fcfg, &sample(&xc), cc.dt, &times).map_err(CliError::numerical)?;
    let upwind = upwind_fbefl(&gu, &fcfg, &sample(&xu), cc.dt, &times).map_err(CliError::numerical)?;

    let ans = ansatz(cfg, &cfg.ansatz.hidden, cfg.ansatz.seed, None)?;
    let prob = problem(cfg, ans.clone(), cfg.grid.n)?;
    let result = run(&prob, u0, &times, |_, _| {}).map_err(CliError::numerical)?;

    let tg = test_grid(a, b)?;
    let xt = tg.points();
    let mut overlay = Table::new("overlay", &["solver", "t", "x", "u"]);
    let mut rows = Vec::new();
    for &t in &times {
        let stnp_q = result.snapshots.iter().find(|(s, _)| *s == t).map(|(_, q)| q);
        let (Some(uc), Some(uu), Some(q)) = (fd_at(&central, t), fd_at(&upwind, t), stnp_q) else {
            continue;
        };
        let us = ans.values(q, &xu, t).map_err(CliError::numerical)?;
        for (x, v) in xc.iter().zip(uc) {
            overlay.push(vec!["central".into(), num(t), num(*x), num(*v)]);
        }
        for (x, v) in xu.iter().zip(uu) {
            overlay.push(vec!["upwind".into(), num(t), num(*x), num(*v)]);
        }
        for (x, v) in xu.iter().zip(&us) {
            overlay.push(vec!["stnp".into(), num(t), num(*x), num(*v)]);
        }
        let on_test = |xs: &[f64], vs: &[f64]| xt.iter().map(|&x| interp_linear(xs, vs, x)).collect::<Vec<_>>();
        let ref_t = on_test(&xu, uu);
        let st = ans.values(q, &xt, t).map_err(CliError::numerical)?;
        rows.push(CompareRow {
            t,
            tv_central: total_variation(uc),
            tv_upwind: total_variation(uu),
            tv_stnp: total_variation(&us),
            l2_central_upwind: relative_l2(&tg, &ref_t, &on_test(&xc, uc))?,
            l2_stnp_upwind: relative_l2(&tg, &ref_t, &st)?,
        });
    }
    out.write(&overlay)?;
    let mut tv = Table::new(
        "tv",
        &["t", "tv_central", "tv_upwind", "tv_stnp", "l2_central_upwind", "l2_stnp_upwind"],
    );
    for r in &rows {
        tv.push(vec![
            num(r.t),
            num(r.tv_central),
            num(r.tv_upwind),
            num(r.tv_stnp),
            num(r.l2_central_upwind),
            num(r.l2_stnp_upwind),
        ]);
    }
    out.write(&tv)?;
    let summary = CompareSummary {
        rows,
        central_blow_up: central.blow_up,
        upwind_blow_up: upwind.blow_up,
        stnp_steps: result.report.steps.len(),
        stnp_contracts: result.report.contracts,
    };
    out.write_json("summary.json", &summary)?;
    if let Some(e) = result.error {
        return Err(CliError::numerical(e));
    }
    Ok(summary)
}
