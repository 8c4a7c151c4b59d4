use log::info;
use serde::Serialize;

use stnp_core::ansatz::fit_initial;
use stnp_core::fracops::GlOrder;
use stnp_core::metrics::{relative_l2, test_grid};
use stnp_core::models::manufactured_exact;
use stnp_core::par;
use stnp_core::stnp::{run_from, ContractStats};

use super::{ansatz, fit_samples, initial_fn, problem};
use crate::config::{Equation, Initial, RunConfig};
use crate::error::CliError;
use crate::output::{num, Output, Table};

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub depth: usize,
    pub order: GlOrder,
    pub n: usize,
    /// Relative L² error against the exact solution at `t_end`; NaN if the run failed.
    pub error: f64,
    pub fit_mse: f64,
    pub steps: usize,
    pub failure: Option<String>,
    pub contracts: ContractStats,
}

fn order_name(o: GlOrder) -> &'static str {
    match o {
        GlOrder::First => "first",
        GlOrder::Second => "second",
    }
}

/// Error table over collocation count × GL order × depth for the manufactured problem.
/// One initial fit per depth is shared by all its cells.
pub fn cmd_convergence(cfg: &RunConfig, out: &Output) -> Result<Vec<ConvergenceRow>, CliError> {
    cfg.check()?;
    let m = &cfg.model;
    if m.equation != Equation::Fbefl || !m.forcing || m.initial != Initial::Manufactured {
        return Err(CliError::Config(
            "convergence needs the manufactured problem: equation fbefl, forcing true, initial manufactured".into(),
        ));
    }
    let c = &cfg.convergence;
    if c.ns.is_empty() || c.orders.is_empty() || c.depths.is_empty() {
        return Err(CliError::Config("convergence needs nonempty ns, orders and depths".into()));
    }
    if c.depths.iter().any(|&d| d < 2) || c.ns.iter().any(|&n| n < 3) || c.width == 0 {
        return Err(CliError::Config("convergence needs depths >= 2, ns >= 3, width >= 1".into()));
    }
    let (a, b) = (cfg.grid.a, cfg.grid.b);
    let u0 = initial_fn(m.initial);
    let (fx, fy) = fit_samples(a, b, cfg.fit.points, u0);
    let tg = test_grid(a, b)?;
    let xs = tg.points();

    let mut rows = Vec::new();
    for &depth in &c.depths {
        let hidden = vec![c.width; depth - 1];
        let ans = ansatz(cfg, &hidden, cfg.ansatz.seed, None)?;
        let mut jobs = Vec::new();
        for &order in &c.orders {
            for &n in &c.ns {
                let mut cc = cfg.clone();
                cc.model.gl_order = order;
                jobs.push((order, n, problem(&cc, ans.clone(), n)?));
            }
        }
        let fit = match fit_initial(&ans, &fx, &fy, 0.0, &cfg.fit.optimizer) {
            Ok(f) => f,
            Err(e) => {
                for (order, n, _) in jobs {
                    rows.push(ConvergenceRow {
                        depth,
                        order,
                        n,
                        error: f64::NAN,
                        fit_mse: f64::NAN,
                        steps: 0,
                        failure: Some(e.to_string()),
                        contracts: ContractStats::default(),
                    });
                }
                continue;
            }
        };
        info!("convergence: depth {depth} fit mse {:.3e}", fit.mse);
        let cells = par::run_jobs(jobs, |(order, n, prob)| {
            let mut row = ConvergenceRow {
                depth,
                order,
                n,
                error: f64::NAN,
                fit_mse: fit.mse,
                steps: 0,
                failure: None,
                contracts: ContractStats::default(),
            };
            match run_from(&prob, fit.params.clone(), u0, &[], |_, _| {}) {
                Ok(r) => {
                    row.steps = r.report.steps.len();
                    row.contracts = r.report.contracts;
                    if let Some(e) = r.error {
                        row.failure = Some(e.to_string());
                    } else {
                        let exact: Vec<f64> = xs.iter().map(|&x| manufactured_exact(x, r.t)).collect();
                        match prob.ansatz.values(&r.q, &xs, r.t).and_then(|u| relative_l2(&tg, &exact, &u)) {
                            Ok(e) => row.error = e,
                            Err(e) => row.failure = Some(e.to_string()),
                        }
                    }
                }
                Err(e) => row.failure = Some(e.to_string()),
            }
            info!("convergence: depth {depth} {} N={n}: {:.3e}", order_name(order), row.error);
            row
        });
        rows.extend(cells);
    }

    let mut tab = Table::new("convergence", &["depth", "order", "n", "error", "fit_mse", "steps", "failure"]);
    for r in &rows {
        tab.push(vec![
            r.depth.to_string(),
            order_name(r.order).into(),
            r.n.to_string(),
            num(r.error),
            num(r.fit_mse),
            r.steps.to_string(),
            r.failure.clone().unwrap_or_default(),
        ]);
    }
    out.write(&tab)?;
    if let Some(r) = rows.iter().find(|r| r.failure.is_some()) {
        return Err(CliError::Numerical(format!(
            "depth {} {} N={}: {}",
            r.depth,
            order_name(r.order),
            r.n,
            r.failure.as_deref().unwrap_or_default()
        )));
    }
    Ok(rows)
}
