use log::info;
use serde::{Deserialize, Serialize};

use super::flow::{ContractStats, StnpFlow};
use crate::ansatz::{fit_initial, Ansatz, BoundaryWrapper, FeatureMap, OptimizerConfig, ParamVector};
use crate::error::{Error, Result};
use crate::fracops::UniformGrid;
use crate::models::Model;
use crate::projection::{weighted_norm, ProjectionConfig};
use crate::timestepping::{march, StepDiagnostics, StepperConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Evaluate the Richardson truncation proxy at every step (one extra RHS on the refined grid).
    pub trunc_proxy: bool,
    /// Keep `δ` of every Runge-Kutta stage, not only the first.
    pub per_stage: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            trunc_proxy: true,
            per_stage: false,
        }
    }
}

/// Everything one STNP run needs.
#[derive(Debug, Clone)]
pub struct StnpProblem {
    pub model: Model,
    /// Carries the boundary data for a Dirichlet lift.
    pub ansatz: Ansatz,
    pub grid: UniformGrid,
    pub projection: ProjectionConfig,
    pub stepper: StepperConfig,
    pub fit: OptimizerConfig,
    /// Uniform samples of `u₀` used by the initial fit.
    pub fit_points: usize,
    pub diagnostics: DiagnosticsConfig,
}

impl StnpProblem {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.projection.validate()?;
        self.stepper.validate()?;
        let (a, b) = (self.grid.a(), self.grid.b());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
        match self.ansatz.spec().bc {
            BoundaryWrapper::DirichletLift { a: la, b: lb } => {
                if !close(la, a) || !close(lb, b) {
                    return Err(Error::Config(format!(
                        "Dirichlet lift on [{la}, {lb}] but collocation grid on [{a}, {b}]"
                    )));
                }
            }
            BoundaryWrapper::Periodic { period } => {
                if !close(period, b - a) {
                    return Err(Error::Config(format!("period {period} does not match the domain length {}", b - a)));
                }
            }
            BoundaryWrapper::None => {}
        }
        if let FeatureMap::TrigPeriodic { .. } = self.ansatz.spec().feature_map {
            if !matches!(self.ansatz.spec().bc, BoundaryWrapper::Periodic { .. }) {
                return Err(Error::Config("trigonometric features require the periodic wrapper".into()));
            }
        }
        if self.fit_points < 2 {
            return Err(Error::Config("initial fit needs at least 2 points".into()));
        }
        Ok(())
    }
}

/// Diagnostics and error-budget terms of one run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub steps: Vec<StepDiagnostics>,
    pub rejected_steps: usize,
    pub fit_mse: f64,
    /// `‖û(0) − u₀‖_w` on the collocation grid.
    pub e0: f64,
    /// `‖û(0)‖_w`.
    pub energy0: f64,
    /// Cumulative `Σ Δt_k·δ_k`, one entry per step.
    pub delta_integral: Vec<f64>,
    /// Cumulative `Σ Δt_k·R̂_k`, one entry per step.
    pub trunc_integral: Vec<f64>,
    /// Steps where `E(t_n) > E(0) + Σ Δt(δ + R̂) + 1e-8`.
    pub budget_violations: usize,
    /// Smallest slack `E(0) + Σ Δt(δ + R̂) + 1e-8 − E(t_n)` over the run.
    pub min_budget_slack: f64,
    /// Largest `max(‖û‖_∞, ‖û_x‖_∞)` seen.
    pub w1inf_max: f64,
    pub contracts: ContractStats,
}

impl RunReport {
    pub fn budget(&self, k: usize) -> f64 {
        self.delta_integral[k] + self.trunc_integral[k]
    }

    pub fn budget_holds(&self) -> bool {
        self.budget_violations == 0
    }

    fn push(&mut self, d: &StepDiagnostics) {
        let last_d = self.delta_integral.last().copied().unwrap_or(0.0);
        let last_r = self.trunc_integral.last().copied().unwrap_or(0.0);
        self.delta_integral.push(last_d + d.dt * d.delta);
        self.trunc_integral.push(last_r + d.dt * d.trunc_proxy);
        let slack = self.energy0 + last_d + last_r + d.dt * (d.delta + d.trunc_proxy) + 1e-8 - d.energy;
        if self.steps.is_empty() || slack < self.min_budget_slack {
            self.min_budget_slack = slack;
        }
        if slack < 0.0 {
            self.budget_violations += 1;
        }
        self.w1inf_max = self.w1inf_max.max(d.w1inf);
        self.steps.push(*d);
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub q0: ParamVector,
    pub q: ParamVector,
    pub t: f64,
    /// `(t, q)` at each requested snapshot time that was reached.
    pub snapshots: Vec<(f64, ParamVector)>,
    pub report: RunReport,
    /// Set when the march stopped early; everything above covers the run up to that point.
    pub error: Option<Error>,
}

/// Fit `q(0)` to `u₀` and march to `problem.stepper.t_end`.
pub fn run<U, O>(problem: &StnpProblem, u0: U, snapshot_times: &[f64], observer: O) -> Result<RunOutput>
where
    U: Fn(f64) -> f64,
    O: FnMut(&[f64], &StepDiagnostics),
{
    problem.validate()?;
    let (a, b) = (problem.grid.a(), problem.grid.b());
    let n = problem.fit_points;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| u0(x)).collect();
    let fit = fit_initial(&problem.ansatz, &xs, &ys, 0.0, &problem.fit)?;
    info!("initial fit mse {:.3e}", fit.mse);
    let mut out = run_from(problem, fit.params, &u0, snapshot_times, observer)?;
    out.report.fit_mse = fit.mse;
    Ok(out)
}

/// March from given initial parameters.
pub fn run_from<U, O>(
    problem: &StnpProblem,
    q0: ParamVector,
    u0: U,
    snapshot_times: &[f64],
    mut observer: O,
) -> Result<RunOutput>
where
    U: Fn(f64) -> f64,
    O: FnMut(&[f64], &StepDiagnostics),
{
    let mut flow = StnpFlow::new(problem)?;
    let xs = problem.grid.points();
    let u_hat = problem.ansatz.values(&q0, &xs, 0.0)?;
    let misfit: Vec<f64> = xs.iter().zip(&u_hat).map(|(&x, u)| u - u0(x)).collect();
    let w = problem.grid.weights();
    let mut report = RunReport {
        e0: weighted_norm(&misfit, w),
        energy0: weighted_norm(&u_hat, w),
        min_budget_slack: f64::INFINITY,
        ..Default::default()
    };

    let t_end = problem.stepper.t_end;
    let mut targets: Vec<f64> = snapshot_times.iter().copied().filter(|&s| s > 0.0 && s < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut snapshots = Vec::new();
    if snapshot_times.contains(&0.0) {
        snapshots.push((0.0, q0.clone()));
    }
    let mut q = q0.0.clone();
    let mut t = 0.0;
    let mut cfg = problem.stepper.clone();
    let mut error = None;
    for &target in &targets {
        if target <= t {
            continue;
        }
        cfg.t_end = target;
        let seg = march(&q, t, &cfg, &mut flow, |qq, d| observer(qq, d))?;
        for d in &seg.steps {
            report.push(d);
        }
        report.rejected_steps += seg.rejected;
        q = seg.q;
        t = seg.t;
        if cfg.scheme == crate::timestepping::Scheme::Rk45 {
            cfg.dt = seg.dt_next.clamp(cfg.dt_min, cfg.dt_max);
        }
        if let Some(e) = seg.error {
            error = Some(e);
            break;
        }
        if snapshot_times.contains(&target) {
            snapshots.push((t, ParamVector(q.clone())));
        }
    }
    report.contracts = flow.contracts;
    Ok(RunOutput {
        q0,
        q: ParamVector(q),
        t,
        snapshots,
        report,
        error,
    })
}
