use std::f64::consts::PI;

use stnp_core::ansatz::{Ansatz, AnsatzSpec, OptimizerConfig};
use stnp_core::fracops::{GlOrder, UniformGrid};
use stnp_core::metrics::{relative_l2, test_grid};
use stnp_core::models::{manufactured_exact, FbeflConfig, Model};
use stnp_core::projection::{Lambda, ProjectionConfig};
use stnp_core::reference::upwind_fbefl;
use stnp_core::stnp::{run, DiagnosticsConfig, StnpProblem};
use stnp_core::timestepping::StepperConfig;

fn fit() -> OptimizerConfig {
    OptimizerConfig {
        adam_iters: 800,
        lm_iters: 200,
        ..Default::default()
    }
}

fn smooth_problem(n: usize, t_end: f64) -> StnpProblem {
    StnpProblem {
        model: Model::Fbefl(FbeflConfig::new(1.6, 0.1, GlOrder::Second)),
        ansatz: Ansatz::new(AnsatzSpec::dirichlet(&[10, 10], -1.0, 1.0, 1)).unwrap(),
        grid: UniformGrid::new(-1.0, 1.0, n).unwrap(),
        projection: ProjectionConfig {
            lambda: Lambda::Relative(1e-4),
            ..Default::default()
        },
        stepper: StepperConfig::ssp_rk3(1e-3, t_end),
        fit: fit(),
        fit_points: 300,
        diagnostics: DiagnosticsConfig::default(),
    }
}

#[test]
fn smooth_run_tracks_grid_solution_and_keeps_its_contracts() {
    let prob = smooth_problem(121, 0.2);
    let u0 = |x: f64| -(PI * x).sin();
    let out = run(&prob, u0, &[0.1, 0.2], |_, _| {}).unwrap();
    assert!(out.error.is_none());
    assert_eq!(out.snapshots.len(), 2);
    let r = &out.report;
    assert_eq!(r.steps.len(), 200);
    assert_eq!(r.contracts.failures, 0);
    assert_eq!(r.contracts.solves, 600);
    assert!(r.budget_holds(), "min slack {}", r.min_budget_slack);
    // dissipative dynamics: the energy does not grow
    assert!(r.steps.last().unwrap().energy <= r.energy0 + 1e-8);

    let g = UniformGrid::new(-1.0, 1.0, 801).unwrap();
    let cfg = FbeflConfig::new(1.6, 0.1, GlOrder::Second);
    let fd0: Vec<f64> = g.points().iter().map(|&x| u0(x)).collect();
    let fd = upwind_fbefl(&g, &cfg, &fd0, 5e-4, &[0.2]).unwrap();
    let xs = g.points();
    let u = prob.ansatz.values(&out.q, &xs, 0.2).unwrap();
    let e = relative_l2(&g, fd.last(), &u).unwrap();
    assert!(e < 2e-2, "STNP vs upwind {e}");
}

#[test]
fn manufactured_solution_is_followed() {
    let prob = StnpProblem {
        model: Model::Fbefl(FbeflConfig::manufactured(1.6, 1.0, GlOrder::Second)),
        ansatz: Ansatz::new(AnsatzSpec::dirichlet(&[10, 10], 0.0, 1.0, 1)).unwrap(),
        grid: UniformGrid::new(0.0, 1.0, 41).unwrap(),
        projection: ProjectionConfig {
            lambda: Lambda::Relative(1e-4),
            ..Default::default()
        },
        stepper: StepperConfig::ssp_rk3(1e-3, 0.1),
        fit: OptimizerConfig {
            adam_iters: 2000,
            lm_iters: 500,
            ..Default::default()
        },
        fit_points: 300,
        diagnostics: DiagnosticsConfig {
            trunc_proxy: false,
            per_stage: false,
        },
    };
    let out = run(&prob, |x| manufactured_exact(x, 0.0), &[], |_, _| {}).unwrap();
    assert!(out.error.is_none(), "{:?} at t = {}, fit mse {}", out.error, out.t, out.report.fit_mse);
    let tg = test_grid(0.0, 1.0).unwrap();
    let xs = tg.points();
    let exact: Vec<f64> = xs.iter().map(|&x| manufactured_exact(x, 0.1)).collect();
    let u = prob.ansatz.values(&out.q, &xs, 0.1).unwrap();
    let e = relative_l2(&tg, &exact, &u).unwrap();
    assert!(e < 2e-2, "relative error {e}");
}

#[test]
fn runs_are_reproducible() {
    let prob = smooth_problem(41, 0.02);
    let u0 = |x: f64| -(PI * x).sin();
    let a = run(&prob, u0, &[], |_, _| {}).unwrap();
    let b = run(&prob, u0, &[], |_, _| {}).unwrap();
    assert_eq!(a.q.0, b.q.0);
    assert_eq!(a.report.steps.len(), b.report.steps.len());
}
