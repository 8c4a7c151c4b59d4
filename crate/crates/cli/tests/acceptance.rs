//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Heavy experiments go through the CLI commands with the shipped configs, so the
//! numbers here are the numbers a user reproduces with the binary. Outputs land in
//! the cargo target tmpdir; the oracle cache there survives between runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stnp_cli::commands::{cmd_compare, cmd_convergence, cmd_fbenn, cmd_solve, ConvergenceRow, FbennSummary};
use stnp_cli::output::Output;
use stnp_cli::{prepare, Command, RunConfig};
use stnp_core::ansatz::{init_xavier, Ansatz, AnsatzSpec};
use stnp_core::fracops::{
    caputo_apply, gamma, shifted_gl2_apply, shifted_gl_apply, Direction, GlOrder, UniformGrid, DEFAULT_SHIFT_P,
    DEFAULT_SHIFT_Q,
};
use stnp_core::projection::{
    defect_values, sensitivity_bound, solve_projection, weighted_norm, Lambda, ProjectionConfig, Solver,
};
use stnp_core::stnp::ContractStats;
use stnp_core::timestepping::{rk45_trial, ssp_rk3_step, FnFlow, Scheme};

// Tolerances and budgets.
const L1_ORDER_BAND: f64 = 0.15;
const GL_ORDER_BAND: f64 = 0.25;
const CLASSICAL_LIMIT_TOL: f64 = 1e-13;
const DELTA_IDENTITY_TOL: f64 = 1e-10;
const UX_TOL: f64 = 1e-5;
const UXX_TOL: f64 = 1e-4;
const JAC_TOL: f64 = 1e-4;
const MANUFACTURED_TOL: f64 = 1e-3;
const TREND_NOISE: f64 = 1.2;
const SHOCK_CENTRAL_EXCESS: f64 = 0.5;
const SHOCK_STNP_EXCESS: f64 = 0.1;
const FBENN_TOL: f64 = 1e-2;
const ORACLE_SELF_TOL: f64 = 1e-4;
const ORACLE_CLASSICAL_TOL: f64 = 1e-3;
const RK45_STEPS: (usize, usize) = (150, 950);
const RK3_SLOPE: (f64, f64) = (3.0, 0.2);
const RK45_SLOPE: (f64, f64) = (5.0, 0.5);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn check<F>(lines: &mut Vec<Line>, id: usize, name: &'static str, budget_s: u64, f: F)
where
    F: FnOnce() -> Result<Outcome, String>,
{
    eprintln!("running criterion {id} ({name})");
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let (pass, detail) = match res {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    eprintln!("  -> {} {detail}", if pass { "pass" } else { "fail" });
    lines.push(Line {
        id,
        name,
        pass,
        detail,
        elapsed,
        budget,
    });
}

/// Least-squares slope of `log e` against `log h`.
fn slope(hs: &[f64], es: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn load(name: &str) -> Result<RunConfig, String> {
    RunConfig::load(&repo_root().join("configs").join(name)).map_err(|e| e.to_string())
}

fn work_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn open(cmd: Command, cfg: RunConfig, dir: &Path) -> Result<(RunConfig, Output), String> {
    prepare(cmd, cfg, None, Some(dir)).map_err(|e| e.to_string())
}

fn l1_order() -> Result<Outcome, String> {
    let mut worst = String::new();
    let mut ok = true;
    for alpha in [0.3, 0.5, 0.7] {
        let exact_c = gamma(4.0).map_err(|e| e.to_string())? / gamma(4.0 - alpha).map_err(|e| e.to_string())?;
        let mut hs = Vec::new();
        let mut es = Vec::new();
        for k in 6..=10 {
            let n = (1usize << k) + 1;
            let g = UniformGrid::new(0.0, 1.0, n).map_err(|e| e.to_string())?;
            let xs = g.points();
            let u: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
            let d = caputo_apply(&u, alpha, &g).map_err(|e| e.to_string())?;
            let exact: Vec<f64> = xs.iter().map(|x| exact_c * x.powf(3.0 - alpha)).collect();
            hs.push(g.h());
            es.push(max_abs_diff(&d, &exact));
        }
        let p = slope(&hs, &es);
        let target = 2.0 - alpha;
        ok &= (p - target).abs() <= L1_ORDER_BAND;
        worst.push_str(&format!("alpha={alpha}: order {p:.3} (target {target:.1}); "));
    }
    Ok(outcome(ok, worst.trim_end_matches("; ").into()))
}

fn gl_orders() -> Result<Outcome, String> {
    let alpha = 1.6;
    // x³(1−x)³ = x³ − 3x⁴ + 3x⁵ − x⁶, differentiated monomial by monomial
    let coeffs = [(3.0, 1.0), (4.0, -3.0), (5.0, 3.0), (6.0, -1.0)];
    let mut exact_terms = Vec::new();
    for (k, c) in coeffs {
        exact_terms.push((k, c * gamma(k + 1.0).map_err(|e| e.to_string())? / gamma(k + 1.0 - alpha).map_err(|e| e.to_string())?));
    }
    let exact = |x: f64| exact_terms.iter().map(|(k, c)| c * x.powf(k - alpha)).sum::<f64>();
    let mut hs = Vec::new();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    let mut full2 = Vec::new();
    for k in 5..=9 {
        let n = (1usize << k) + 1;
        let g = UniformGrid::new(0.0, 1.0, n).map_err(|e| e.to_string())?;
        let xs = g.points();
        let u: Vec<f64> = xs.iter().map(|x| (x * (1.0 - x)).powi(3)).collect();
        let d1 = shifted_gl_apply(&u, alpha, &g, DEFAULT_SHIFT_P, Direction::Left).map_err(|e| e.to_string())?;
        let d2 = shifted_gl2_apply(&u, alpha, &g, DEFAULT_SHIFT_P, DEFAULT_SHIFT_Q, Direction::Left)
            .map_err(|e| e.to_string())?;
        let ex: Vec<f64> = xs.iter().map(|&x| exact(x)).collect();
        // the cubic zero at x = 0 is too rough for the shifted second-order
        // formula at this alpha, so a layer near 0 converges slower
        let (lo, hi) = (n / 4, 3 * n / 4 + 1);
        hs.push(g.h());
        e1.push(max_abs_diff(&d1[lo..hi], &ex[lo..hi]));
        e2.push(max_abs_diff(&d2[lo..hi], &ex[lo..hi]));
        full2.push(max_abs_diff(&d2[1..n - 1], &ex[1..n - 1]));
    }
    let (p1, p2) = (slope(&hs, &e1), slope(&hs, &e2));
    let ok = (p1 - 1.0).abs() <= GL_ORDER_BAND && (p2 - 2.0).abs() <= GL_ORDER_BAND;
    Ok(outcome(
        ok,
        format!(
            "on [0.25, 0.75]: GL1 order {p1:.3}, GL2 order {p2:.3}; GL2 over all interior nodes {:.3}",
            slope(&hs, &full2)
        ),
    ))
}

fn classical_limit() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(5..200);
        let g = UniformGrid::new(0.0, rng.random_range(0.5..4.0), n).map_err(|e| e.to_string())?;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gl = shifted_gl_apply(&u, 2.0, &g, 1, Direction::Left).map_err(|e| e.to_string())?;
        let h2 = g.h() * g.h();
        let cd: Vec<f64> = (1..n - 1).map(|i| (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2).collect();
        worst = worst.max(rel(&gl[1..n - 1], &cd));
    }
    Ok(outcome(worst <= CLASSICAL_LIMIT_TOL, format!("worst relative difference {worst:.2e}")))
}

/// Random instances for the projection properties; `runs` carries the contract
/// tallies from every STNP solve made by the other criteria.
fn projection_contracts(runs: &[(String, ContractStats)]) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ident = 0.0f64;
    let mut defect_ok = true;
    let mut contraction_ok = true;
    let mut monotone_ok = true;
    let mut sens_ok = true;
    let mut worst_sens = 0.0f64;
    for inst in 0..100 {
        let m = rng.random_range(3..60);
        let n = rng.random_range(2..40);
        let j = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let f: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let solver = if inst % 2 == 0 { Solver::StackedQr } else { Solver::NormalCholesky };
        let mut last_norm = f64::INFINITY;
        for lambda in [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0] {
            let cfg = ProjectionConfig {
                lambda: Lambda::Absolute(lambda),
                solver,
                ..Default::default()
            };
            let out = solve_projection(&j, &f, &w, &cfg).map_err(|e| e.to_string())?;
            let d = defect_values(&j, &f, &out.gamma).map_err(|e| e.to_string())?;
            let dn = weighted_norm(&d, &w);
            let rebuilt = (dn * dn + lambda * lambda * out.gamma_norm * out.gamma_norm).sqrt();
            worst_ident = worst_ident.max((out.delta - rebuilt).abs() / out.delta);
            defect_ok &= dn <= out.delta * (1.0 + 1e-12);
            contraction_ok &= out.contraction < 1.0;
            monotone_ok &= out.gamma_norm <= last_norm * (1.0 + 1e-10);
            last_norm = out.gamma_norm;
            let s = sensitivity_bound(&j, &w, lambda).map_err(|e| e.to_string())?;
            let ratio = s.value * 2.0 * lambda;
            worst_sens = worst_sens.max(ratio);
            sens_ok &= !s.infinite && ratio <= 1.0 + 1e-12;
        }
    }
    let random_ok = worst_ident <= DELTA_IDENTITY_TOL && defect_ok && contraction_ok && monotone_ok && sens_ok;
    let mut detail = format!(
        "random: delta identity {worst_ident:.1e}, defect<=delta {defect_ok}, contraction<1 {contraction_ok}, \
         monotone {monotone_ok}, 2*lambda*sensitivity max {worst_sens:.4}"
    );
    let mut total = ContractStats::default();
    let mut runs_ok = !runs.is_empty();
    for (_, s) in runs {
        total.solves += s.solves;
        total.failures += s.failures;
        total.worst_delta_identity = total.worst_delta_identity.max(s.worst_delta_identity);
        total.worst_defect_excess = total.worst_defect_excess.max(s.worst_defect_excess);
        total.max_contraction = total.max_contraction.max(s.max_contraction);
        runs_ok &= s.failures == 0 && s.worst_delta_identity <= DELTA_IDENTITY_TOL;
    }
    detail.push_str(&format!(
        "; runs: {} solves over {} runs, {} failures, delta identity {:.1e}, max contraction {:.12}",
        total.solves,
        runs.len(),
        total.failures,
        total.worst_delta_identity,
        total.max_contraction
    ));
    Ok(outcome(random_ok && runs_ok, detail))
}

fn autodiff() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut wx, mut wxx, mut wj) = (0.0f64, 0.0f64, 0.0f64);
    for net in 0..20 {
        let depth = rng.random_range(1..4);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(2..12)).collect();
        let spec = AnsatzSpec::dirichlet(&hidden, -1.0, 1.0, 100 + net);
        let ans = Ansatz::new(spec.clone()).map_err(|e| e.to_string())?;
        let mut q = init_xavier(&spec).0;
        for v in &mut q {
            *v += rng.random_range(-0.3..0.3);
        }
        let xs: Vec<f64> = (0..25).map(|_| rng.random_range(-0.95..0.95)).collect();
        let u = |x: f64| ans.value(&q, x, 0.0).unwrap();
        let (mut ad_x, mut fd_x, mut ad_xx, mut fd_xx) = (vec![], vec![], vec![], vec![]);
        for &x in &xs {
            let (_, ux, uxx) = ans.eval_u_ux_uxx(&q, x, 0.0).map_err(|e| e.to_string())?;
            let h = 1e-5;
            ad_x.push(ux);
            fd_x.push((u(x + h) - u(x - h)) / (2.0 * h));
            let h = 1e-4;
            ad_xx.push(uxx);
            fd_xx.push((u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h));
        }
        wx = wx.max(rel(&ad_x, &fd_x));
        wxx = wxx.max(rel(&ad_xx, &fd_xx));
        let jac = ans.param_jacobian(&q, &xs, 0.0).map_err(|e| e.to_string())?;
        let h = 1e-6;
        let mut ad = Vec::new();
        let mut fd = Vec::new();
        for p in 0..q.len() {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[p] += h;
            qm[p] -= h;
            for (i, &x) in xs.iter().enumerate() {
                let d = (ans.value(&qp, x, 0.0).unwrap() - ans.value(&qm, x, 0.0).unwrap()) / (2.0 * h);
                ad.push(jac[(i, p)]);
                fd.push(d);
            }
        }
        wj = wj.max(rel(&ad, &fd));
    }
    let ok = wx <= UX_TOL && wxx <= UXX_TOL && wj <= JAC_TOL;
    Ok(outcome(ok, format!("worst relative error u_x {wx:.1e}, u_xx {wxx:.1e}, J {wj:.1e}")))
}

fn manufactured(runs: &mut Vec<(String, ContractStats)>) -> Result<Outcome, String> {
    let mut cfg = load("convergence.json")?;
    cfg.convergence.ns = vec![10, 20, 40, 50, 100, 200, 400];
    cfg.convergence.orders = vec![GlOrder::Second, GlOrder::First];
    cfg.convergence.depths = vec![7];
    let (cfg, out) = open(Command::Convergence, cfg, &work_dir("convergence"))?;
    let rows: Vec<ConvergenceRow> = cmd_convergence(&cfg, &out).map_err(|e| e.to_string())?;
    for r in &rows {
        runs.push((format!("manufactured {:?} N={}", r.order, r.n), r.contracts));
    }
    let err = |order: GlOrder, n: usize| {
        rows.iter()
            .find(|r| r.order == order && r.n == n)
            .map(|r| r.error)
            .unwrap_or(f64::NAN)
    };
    let gl2: Vec<(usize, f64)> = cfg.convergence.ns.iter().map(|&n| (n, err(GlOrder::Second, n))).collect();
    let trend = gl2.windows(2).all(|w| w[1].1 <= TREND_NOISE * w[0].1);
    let e400 = err(GlOrder::Second, 400);
    let e400_gl1 = err(GlOrder::First, 400);
    let ok = e400 <= MANUFACTURED_TOL && trend && e400 < e400_gl1;
    let series: Vec<String> = gl2.iter().map(|(n, e)| format!("{n}:{e:.2e}")).collect();
    Ok(outcome(
        ok,
        format!("GL2 errors [{}], nonincreasing {trend}, GL1 at N=400 {e400_gl1:.2e}", series.join(" ")),
    ))
}

fn shock(runs: &mut Vec<(String, ContractStats)>) -> Result<Outcome, String> {
    let cfg = load("shock.json")?;
    let (cfg, out) = open(Command::Compare, cfg, &work_dir("compare"))?;
    let s = cmd_compare(&cfg, &out).map_err(|e| e.to_string())?;
    runs.push(("shock".into(), s.stnp_contracts));
    let row = s.at(cfg.stepper.t_end).ok_or("no row at t_end")?;
    let central = row.tv_central - row.tv_upwind;
    let stnp = row.tv_stnp - row.tv_upwind;
    let ok = central > SHOCK_CENTRAL_EXCESS && stnp <= SHOCK_STNP_EXCESS;
    Ok(outcome(
        ok,
        format!(
            "TV upwind {:.4}, central excess {central:.4}, STNP excess {stnp:.4}, STNP vs upwind L2 {:.2e}",
            row.tv_upwind, row.l2_stnp_upwind
        ),
    ))
}

fn energy(runs: &mut Vec<(String, ContractStats)>) -> Result<Outcome, String> {
    let cfg = load("energy.json")?;
    let (cfg, out) = open(Command::Solve, cfg, &work_dir("energy"))?;
    let s = cmd_solve(&cfg, &out).map_err(|e| e.to_string())?;
    runs.push(("energy".into(), s.report.contracts));
    let r = &s.report;
    let ok = r.budget_violations == 0 && !r.steps.is_empty() && r.trunc_integral.last().is_some_and(|v| *v > 0.0);
    Ok(outcome(
        ok,
        format!(
            "{} steps to t={}, {} violations, min slack {:.2e}",
            r.steps.len(),
            s.t,
            r.budget_violations,
            r.min_budget_slack
        ),
    ))
}

struct FbennRuns {
    main: FbennSummary,
    sanity: FbennSummary,
}

fn fbenn_runs() -> Result<FbennRuns, String> {
    let (cfg, out) = open(Command::Fbenn, load("fbenn.json")?, &work_dir("fbenn"))?;
    let main = cmd_fbenn(&cfg, &out).map_err(|e| e.to_string())?;
    let (cfg, out) = open(Command::Fbenn, load("fbenn_sanity.json")?, &work_dir("fbenn-sanity"))?;
    let sanity = cmd_fbenn(&cfg, &out).map_err(|e| e.to_string())?;
    Ok(FbennRuns { main, sanity })
}

fn oracle_gates(f: &FbennRuns) -> (bool, String) {
    let classical = f.sanity.classical_diff.unwrap_or(f64::NAN);
    let ok = f.main.oracle_self_change <= ORACLE_SELF_TOL && classical <= ORACLE_CLASSICAL_TOL;
    (
        ok,
        format!("oracle self-change {:.2e}, beta=1 vs classical {classical:.2e}", f.main.oracle_self_change),
    )
}

fn fbenn_error(f: &Result<FbennRuns, String>) -> Result<Outcome, String> {
    let f = f.as_ref().map_err(Clone::clone)?;
    let (gates, gate_detail) = oracle_gates(f);
    let rk3 = f.main.runs_of(Scheme::SspRk3).next().ok_or("no SSP-RK3 run")?;
    let e = rk3.error_at(0.5).ok_or("no error at t=0.5")?;
    Ok(outcome(gates && e <= FBENN_TOL, format!("error at t=0.5 {e:.2e}; {gate_detail}")))
}

fn rk3_vs_rk45(f: &Result<FbennRuns, String>) -> Result<Outcome, String> {
    let f = f.as_ref().map_err(Clone::clone)?;
    let rk3 = f.main.runs_of(Scheme::SspRk3).next().ok_or("no SSP-RK3 run")?;
    let rk45 = f.main.runs_of(Scheme::Rk45).next().ok_or("no RK45 run")?;
    let (e3, e45) = (
        rk3.errors.last().map(|e| e.1).unwrap_or(f64::NAN),
        rk45.errors.last().map(|e| e.1).unwrap_or(f64::NAN),
    );
    let n45 = rk45.accepted_steps;
    let ok = (RK45_STEPS.0..=RK45_STEPS.1).contains(&n45) && n45 < rk3.accepted_steps && e45 <= 2.0 * e3;
    Ok(outcome(
        ok,
        format!(
            "RK45 {n45} accepted ({} rejected), RK3 {}; final error RK45 {e45:.2e}, RK3 {e3:.2e}",
            rk45.rejected_steps, rk3.accepted_steps
        ),
    ))
}

fn integrator_orders() -> Result<Outcome, String> {
    let mut flow = FnFlow(|q: &[f64], _t: f64| q.iter().map(|v| -v).collect::<Vec<_>>());
    let hs: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
    let mut e3 = Vec::new();
    let mut e5 = Vec::new();
    for &h in &hs {
        let n = (1.0 / h).round() as usize;
        let (mut a, mut b) = (vec![1.0], vec![1.0]);
        for k in 0..n {
            let t = k as f64 * h;
            a = ssp_rk3_step(&a, t, h, &mut flow).map_err(|e| e.to_string())?;
            b = rk45_trial(&b, t, h, &mut flow).map_err(|e| e.to_string())?.0;
        }
        let exact = (-1.0f64).exp();
        e3.push((a[0] - exact).abs());
        e5.push((b[0] - exact).abs());
    }
    let (p3, p5) = (slope(&hs, &e3), slope(&hs, &e5));
    let ok = (p3 - RK3_SLOPE.0).abs() <= RK3_SLOPE.1 && (p5 - RK45_SLOPE.0).abs() <= RK45_SLOPE.1;
    Ok(outcome(ok, format!("SSP-RK3 slope {p3:.3}, RK45 slope {p5:.3}")))
}

/// Every CSV and JSON file directly under `dir`, by name.
fn tables(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("");
        if p.is_file() && (ext == "csv" || ext == "json") {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).map_err(|e| e.to_string())?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Result<Outcome, String> {
    let tiny = r#"{ "grid": {"n": 41}, "stepper": {"t_end": 0.02},
        "fit": {"points": 200, "optimizer": {"adam_iters": 200, "lm_iters": 20}},
        "projection": {"lambda": {"relative": 1e-4}}, "output": {"snapshots": [0.01]},
        "compare": {"central_nodes": 41, "upwind_nodes": 81} }"#;
    let manufactured = r#"{ "model": {"epsilon": 1.0, "forcing": true, "initial": "manufactured"},
        "grid": {"a": 0.0, "b": 1.0}, "stepper": {"t_end": 0.02},
        "fit": {"points": 200, "optimizer": {"adam_iters": 200, "lm_iters": 20}},
        "projection": {"lambda": {"relative": 1e-4}}, "output": {"snapshots": []},
        "convergence": {"ns": [10, 20], "orders": ["second"], "depths": [2], "width": 5} }"#;
    let fbenn = r#"{ "model": {"equation": "fbenn", "beta": 0.8, "epsilon": 0.0021220659078919377},
        "grid": {"n": 101}, "stepper": {"t_end": 0.02},
        "fit": {"points": 200, "optimizer": {"adam_iters": 200, "lm_iters": 20}},
        "projection": {"lambda": {"relative": 1e-4}}, "output": {"snapshots": []},
        "fbenn": {"oracle": {"fine_n": 201, "quad_n": 201}, "error_times": [0.01, 0.02],
                  "schemes": ["ssp_rk3", "rk45"], "ensemble_seeds": [1, 2]} }"#;
    let cases = [
        (Command::Solve, tiny),
        (Command::Compare, tiny),
        (Command::Convergence, manufactured),
        (Command::Fbenn, fbenn),
    ];
    let mut compared = 0;
    for (cmd, json) in cases {
        let mut seen = Vec::new();
        for rep in 0..2 {
            let dir = work_dir("determinism").join(format!("{}-{rep}", cmd.name()));
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| e.to_string())?;
            }
            let cfg = RunConfig::from_json(json).map_err(|e| e.to_string())?;
            let (cfg, out) = open(cmd, cfg, &dir)?;
            let res = match cmd {
                Command::Solve => cmd_solve(&cfg, &out).map(drop),
                Command::Compare => cmd_compare(&cfg, &out).map(drop),
                Command::Convergence => cmd_convergence(&cfg, &out).map(drop),
                Command::Fbenn => cmd_fbenn(&cfg, &out).map(drop),
                Command::OracleCache => unreachable!(),
            };
            res.map_err(|e| format!("{}: {e}", cmd.name()))?;
            seen.push(tables(&dir)?);
        }
        if seen[0].is_empty() || seen[0] != seen[1] {
            return Ok(outcome(false, format!("{} outputs differ between two runs", cmd.name())));
        }
        compared += seen[0].len();
    }
    Ok(outcome(true, format!("{compared} files identical across repeated solve, compare, convergence and fbenn runs")))
}

fn main() {
    let mut lines = Vec::new();
    let mut runs: Vec<(String, ContractStats)> = Vec::new();
    check(&mut lines, 1, "L1 order", 5, l1_order);
    check(&mut lines, 2, "GL orders", 10, gl_orders);
    check(&mut lines, 3, "classical limit", 1, classical_limit);
    check(&mut lines, 5, "autodiff", 10, autodiff);
    check(&mut lines, 11, "integrator orders", 1, integrator_orders);
    check(&mut lines, 6, "manufactured convergence", 30 * 60, || manufactured(&mut runs));
    check(&mut lines, 7, "shock, non-oscillatory", 20 * 60, || shock(&mut runs));
    check(&mut lines, 8, "energy budget", 10 * 60, || energy(&mut runs));
    let start = Instant::now();
    let fb = fbenn_runs();
    let fb_time = start.elapsed();
    if let Ok(f) = &fb {
        for r in &f.main.runs {
            runs.push((format!("fbenn {:?} seed {}", r.scheme, r.seed), r.contracts));
        }
    }
    check(&mut lines, 9, "FBENN vs oracle", 30 * 60, || fbenn_error(&fb));
    check(&mut lines, 10, "RK3 vs RK45", 30 * 60, || rk3_vs_rk45(&fb));
    // both criteria are read off the same oracle and runs
    for l in lines.iter_mut().filter(|l| l.id == 9 || l.id == 10) {
        l.elapsed += fb_time;
    }
    check(&mut lines, 12, "determinism", 30 * 60, determinism);
    check(&mut lines, 4, "projection contracts", 10, || projection_contracts(&runs));

    lines.sort_by_key(|l| l.id);
    println!();
    let mut failed = 0;
    for l in &lines {
        let in_budget = l.elapsed <= l.budget;
        let pass = l.pass && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} | {} | {:.1}s{}",
            l.id,
            l.name,
            if pass { "PASS" } else { "FAIL" },
            l.detail,
            l.elapsed.as_secs_f64(),
            if in_budget { String::new() } else { format!(" (over the {}s budget)", l.budget.as_secs()) }
        );
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
