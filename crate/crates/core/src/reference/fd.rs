use log::warn;

use crate::error::{check_len, Result};
use crate::fracops::{FracOpPlan, UniformGrid};
use crate::models::FbeflConfig;

/// Godunov flux for `F(u) = u²/2` (exact Riemann solution at the interface).
pub fn godunov_flux(ul: f64, ur: f64) -> f64 {
    let f = |u: f64| 0.5 * u * u;
    if ul <= ur {
        if ul > 0.0 {
            f(ul)
        } else if ur < 0.0 {
            f(ur)
        } else {
            0.0
        }
    } else {
        f(ul).max(f(ur))
    }
}

/// `Σ|u_{i+1} − u_i|`.
pub fn total_variation(u: &[f64]) -> f64 {
    u.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Snapshots of a grid solver run.
#[derive(Debug, Clone)]
pub struct FdTrajectory {
    pub grid: UniformGrid,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub steps: usize,
    /// Time at which `max|u|` exceeded 10³; the run stops there.
    pub blow_up: Option<f64>,
}

impl FdTrajectory {
    pub fn last(&self) -> &[f64] {
        self.snapshots.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Convection {
    Central,
    Godunov,
}

const BLOW_UP: f64 = 1e3;

/// Second-order central differences of the conservative flux, fractional
/// Laplacian by the configured GL scheme, SSP-RK3 in time, zero Dirichlet data.
pub fn central_diff_fbefl(
    grid: &UniformGrid,
    cfg: &FbeflConfig,
    u0: &[f64],
    dt: f64,
    snapshot_times: &[f64],
) -> Result<FdTrajectory> {
    solve(grid, cfg, u0, dt, snapshot_times, Convection::Central)
}

/// Godunov upwind flux, fractional Laplacian by the configured GL scheme,
/// SSP-RK3 under `dt ≤ 0.4·h/max|u|` (reduced automatically with a warning).
pub fn upwind_fbefl(
    grid: &UniformGrid,
    cfg: &FbeflConfig,
    u0: &[f64],
    dt: f64,
    snapshot_times: &[f64],
) -> Result<FdTrajectory> {
    solve(grid, cfg, u0, dt, snapshot_times, Convection::Godunov)
}

fn solve(
    grid: &UniformGrid,
    cfg: &FbeflConfig,
    u0: &[f64],
    dt: f64,
    snapshot_times: &[f64],
    conv: Convection,
) -> Result<FdTrajectory> {
    cfg.validate()?;
    check_len("initial grid values", grid.len(), u0.len())?;
    let plan = FracOpPlan::frac_laplacian(cfg.alpha, grid, cfg.gl_order)?;
    let h = grid.h();
    let n = grid.len();
    let xs = grid.points();
    // explicit diffusion limit from a Gershgorin bound on the operator rows
    let spectral = plan
        .to_dense()?
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * cfg.epsilon;
    let rhs = |u: &[f64], t: f64| -> Result<Vec<f64>> {
        let lap = plan.apply(u)?;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            let conv_term = match conv {
                Convection::Central => (0.5 * u[i + 1] * u[i + 1] - 0.5 * u[i - 1] * u[i - 1]) / (2.0 * h),
                Convection::Godunov => (godunov_flux(u[i], u[i + 1]) - godunov_flux(u[i - 1], u[i])) / h,
            };
            out[i] = -conv_term - cfg.epsilon * lap[i];
            if let Some(f) = &cfg.forcing {
                out[i] += f(xs[i], t);
            }
        }
        Ok(out)
    };

    let mut u = u0.to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut steps = 0;
    let mut warned = false;
    let mut blow_up = None;
    let mut targets: Vec<f64> = snapshot_times.to_vec();
    targets.sort_by(f64::total_cmp);
    'outer: for &target in &targets {
        while target - t > 1e-14 * target.max(1.0) {
            let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut step = dt;
            if conv == Convection::Godunov && umax > 0.0 && step > 0.4 * h / umax {
                step = 0.4 * h / umax;
                if !warned {
                    warn!("upwind: dt reduced to {step:.3e} by the CFL guard");
                    warned = true;
                }
            }
            if spectral > 0.0 && step > 1.2 / spectral {
                step = 1.2 / spectral;
                if !warned {
                    warn!("dt reduced to {step:.3e} by the diffusion limit");
                    warned = true;
                }
            }
            let step = step.min(target - t);
            let k0 = rhs(&u, t)?;
            let u1: Vec<f64> = (0..n).map(|i| u[i] + step * k0[i]).collect();
            let k1 = rhs(&u1, t + step)?;
            let u2: Vec<f64> = (0..n).map(|i| 0.75 * u[i] + 0.25 * (u1[i] + step * k1[i])).collect();
            let k2 = rhs(&u2, t + 0.5 * step)?;
            for i in 0..n {
                u[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + step * k2[i]);
            }
            t = if target - (t + step) <= 1e-14 * target.max(1.0) { target } else { t + step };
            steps += 1;
            if u.iter().any(|v| !(v.abs() <= BLOW_UP)) {
                warn!("grid solver blew up at t = {t}");
                blow_up = Some(t);
                break 'outer;
            }
        }
        times.push(t);
        snapshots.push(u.clone());
    }
    Ok(FdTrajectory {
        grid: grid.clone(),
        times,
        snapshots,
        steps,
        blow_up,
    })
}
