use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ansatz::BoundaryTable;
use crate::error::{check_finite, Error, Result};
use crate::fracops::{FracOpPlan, UniformGrid};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfColeConfig {
    pub beta: f64,
    pub epsilon: f64,
    /// Nodes of the fine x-grid on `[a, b]` where `ψ` and its Caputo derivative are formed.
    pub fine_n: usize,
    /// How far the y-grid of the heat-kernel convolution reaches past `[a, b]`.
    pub y_extent: f64,
    /// Nodes of the y-grid across `[a, b]`; the same spacing continues into the extension.
    pub quad_n: usize,
}

impl HopfColeConfig {
    /// `y_extent = 6·sqrt(4εt_max)`.
    pub fn for_horizon(beta: f64, epsilon: f64, t_max: f64, fine_n: usize, quad_n: usize) -> Self {
        Self {
            beta,
            epsilon,
            fine_n,
            y_extent: 6.0 * (4.0 * epsilon * t_max).sqrt(),
            quad_n,
        }
    }

    /// Both resolutions doubled (in intervals).
    pub fn refined(&self) -> Self {
        Self {
            fine_n: 2 * self.fine_n - 1,
            quad_n: 2 * self.quad_n - 1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Domain(format!("oracle order must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain("oracle epsilon must be positive".into()));
        }
        if self.fine_n < 8 || self.quad_n < 8 {
            return Err(Error::Config("oracle grids need at least 8 nodes".into()));
        }
        if !(self.y_extent > 0.0) {
            return Err(Error::Config("oracle y_extent must be positive".into()));
        }
        Ok(())
    }
}

/// The fractional Hopf–Cole solution of FBENN for one initial condition on `[a, b]`.
///
/// `u = −2ε·D^β log φ`, where `φ` is the heat flow of `exp(−I^β u₀ / 2ε)`.
#[derive(Debug, Clone)]
pub struct HopfCole {
    cfg: HopfColeConfig,
    fine: UniformGrid,
    /// For β < 1: `fine` with every interval halved, and L1 plans on both grids.
    halved: Option<(UniformGrid, FracOpPlan, FracOpPlan)>,
    /// y-grid start, spacing, and `I^β u₀` on it.
    y0: f64,
    hy: f64,
    iu: Vec<f64>,
    u0_a: f64,
    u0_b: f64,
}

impl HopfCole {
    pub fn new<U: Fn(f64) -> f64>(cfg: HopfColeConfig, a: f64, b: f64, u0: U) -> Result<Self> {
        cfg.validate()?;
        let fine = UniformGrid::new(a, b, cfg.fine_n)?;
        let hy = (b - a) / (cfg.quad_n - 1) as f64;
        let ext = (cfg.y_extent / hy).ceil() as usize + 1;
        // I^β u₀ vanishes left of a; right of b it keeps integrating u₀ extended by zero
        let right = UniformGrid::new(a, a + (cfg.quad_n - 1 + ext) as f64 * hy, cfg.quad_n + ext)?;
        let u0_ext: Vec<f64> = right
            .points()
            .iter()
            .enumerate()
            .map(|(k, &y)| if k < cfg.quad_n { u0(y) } else { 0.0 })
            .collect();
        check_finite("initial condition", &u0_ext)?;
        let iu_right = FracOpPlan::rl_integral(cfg.beta, &right)?.apply(&u0_ext)?;
        let mut iu = vec![0.0; ext];
        iu.extend(iu_right);
        let halved = if cfg.beta < 1.0 {
            let g2 = UniformGrid::new(a, b, 2 * cfg.fine_n - 1)?;
            let p2 = FracOpPlan::caputo_l1(cfg.beta, &g2)?;
            Some((g2, p2, FracOpPlan::caputo_l1(cfg.beta, &fine)?))
        } else {
            None
        };
        Ok(Self {
            cfg,
            fine,
            halved,
            y0: a - ext as f64 * hy,
            hy,
            iu,
            u0_a: u0(a),
            u0_b: u0(b),
        })
    }

    pub fn config(&self) -> &HopfColeConfig {
        &self.cfg
    }

    pub fn fine_grid(&self) -> &UniformGrid {
        &self.fine
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("oracle needs t > 0, got {t}")));
        }
        let need = 6.0 * (4.0 * self.cfg.epsilon * t).sqrt();
        if self.cfg.y_extent < need * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "y_extent {} below 6·sqrt(4εt) = {need} at t = {t}",
                self.cfg.y_extent
            )));
        }
        Ok(())
    }

    /// `ψ = log φ` at `xs`, by log-sum-exp over the whole y-grid. The factor
    /// `exp(−I^β u₀ / 2ε)` can outweigh the Gaussian far from `x`, so no window around `x`
    /// is cut; terms more than `e^{-50}` below the largest are dropped.
    fn log_phi(&self, xs: &[f64], t: f64) -> Result<Vec<f64>> {
        let eps = self.cfg.epsilon;
        let four_et = 4.0 * eps * t;
        let norm = 0.5 * (PI * four_et).ln();
        let ny = self.iu.len();
        let psi = par::map_slice(xs, |&x| {
            let expo: Vec<f64> = (0..ny)
                .map(|k| {
                    let y = self.y0 + k as f64 * self.hy;
                    -(x - y) * (x - y) / four_et - self.iu[k] / (2.0 * eps)
                })
                .collect();
            let m = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut s = 0.0;
            for (k, &e) in expo.iter().enumerate() {
                if e > m - 50.0 {
                    let w = if k == 0 || k == ny - 1 { 0.5 } else { 1.0 };
                    s += w * (e - m).exp();
                }
            }
            if !(s > 0.0) || !s.is_finite() {
                f64::NAN
            } else {
                m + (s * self.hy).ln() - norm
            }
        });
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("heat-kernel quadrature broke down at t = {t}")));
        }
        Ok(psi)
    }

    /// The oracle on its own fine grid. For β < 1 the L1 derivative is taken on `fine` and on
    /// the halved grid and extrapolated to cancel the leading `h^{2−β}` error term.
    pub fn fine_solution(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let d = match &self.halved {
            Some((g2, p2, p1)) => {
                let psi2 = self.log_phi(&g2.points(), t)?;
                let d2 = p2.apply(&psi2)?;
                let psi1: Vec<f64> = psi2.iter().step_by(2).copied().collect();
                let d1 = p1.apply(&psi1)?;
                let r = 2f64.powf(2.0 - self.cfg.beta);
                d1.iter().zip(d2.iter().step_by(2)).map(|(c, f)| (r * f - c) / (r - 1.0)).collect()
            }
            None => derivative(&self.log_phi(&self.fine.points(), t)?, self.fine.h()),
        };
        Ok(d.iter().map(|v| -2.0 * self.cfg.epsilon * v).collect())
    }

    /// The oracle at arbitrary points of `[a, b]`, by cubic interpolation from the fine grid.
    pub fn eval(&self, xs: &[f64], t: f64) -> Result<Vec<f64>> {
        let u = self.fine_solution(t)?;
        xs.iter().map(|&x| interp_cubic(&self.fine, &u, x)).collect()
    }

    /// `(u(a, t), u(b, t))`; at `t = 0` the initial values.
    pub fn boundary_values(&self, t: f64) -> Result<(f64, f64)> {
        if t == 0.0 {
            return Ok((self.u0_a, self.u0_b));
        }
        let u = self.fine_solution(t)?;
        Ok((u[0], u[u.len() - 1]))
    }

    /// Boundary values tabulated at `times` (ascending, may start at 0).
    pub fn boundary_table(&self, times: &[f64]) -> Result<BoundaryTable> {
        let vals: Vec<Result<(f64, f64)>> = par::run_jobs(times.to_vec(), |t| self.boundary_values(t));
        let mut left = Vec::with_capacity(times.len());
        let mut right = Vec::with_capacity(times.len());
        for v in vals {
            let (l, r) = v?;
            left.push(l);
            right.push(r);
        }
        BoundaryTable::new(times.to_vec(), left, right)
    }
}

/// One-shot evaluation of the oracle at `xs`.
pub fn fbenn_exact<U: Fn(f64) -> f64>(
    xs: &[f64],
    t: f64,
    u0: U,
    cfg: HopfColeConfig,
    a: f64,
    b: f64,
) -> Result<Vec<f64>> {
    HopfCole::new(cfg, a, b, u0)?.eval(xs, t)
}

/// Second-order differences, one-sided at the ends.
fn derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Four-point Lagrange interpolation on a uniform grid.
fn interp_cubic(grid: &UniformGrid, v: &[f64], x: f64) -> Result<f64> {
    let (a, b, h) = (grid.a(), grid.b(), grid.h());
    if x < a - 1e-12 * (b - a) || x > b + 1e-12 * (b - a) {
        return Err(Error::Domain(format!("oracle point {x} outside [{a}, {b}]")));
    }
    let n = v.len();
    let s = ((x - a) / h).clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    let start = i.saturating_sub(1).min(n - 4);
    let mut out = 0.0;
    for j in 0..4 {
        let mut l = 1.0;
        for m in 0..4 {
            if m != j {
                l *= (s - (start + m) as f64) / (j as f64 - m as f64);
            }
        }
        out += l * v[start + j];
    }
    Ok(out)
}

/// Viscous Burgers `u_t + u·u_x = ε·u_xx` by the classical Cole–Hopf formula,
/// `u = ∫ ((x−y)/t)·e^{−G} dy / ∫ e^{−G} dy` with `G = (x−y)²/4εt + Φ(y)/2ε`
/// and `Φ` the antiderivative of `u₀` from `a` (constant outside `[a, b]`).
///
/// Written independently of [`HopfCole`]: no logarithm, no fractional operators.
pub fn classical_cole_hopf<U: Fn(f64) -> f64>(
    xs: &[f64],
    t: f64,
    epsilon: f64,
    a: f64,
    b: f64,
    u0: U,
    n_quad: usize,
) -> Result<Vec<f64>> {
    if !(t > 0.0 && epsilon > 0.0) || n_quad < 3 {
        return Err(Error::Domain("classical Cole-Hopf needs t > 0, epsilon > 0".into()));
    }
    let width = 8.0 * (4.0 * epsilon * t).sqrt();
    let lo = a - width;
    let hi = b + width;
    let n = n_quad;
    let h = (hi - lo) / (n - 1) as f64;
    // Φ by Simpson increments of u₀ between nodes
    let mut phi = vec![0.0; n];
    let f = |y: f64| if (a..=b).contains(&y) { u0(y) } else { 0.0 };
    for k in 1..n {
        let y1 = lo + (k - 1) as f64 * h;
        let y2 = lo + k as f64 * h;
        phi[k] = phi[k - 1] + h / 6.0 * (f(y1) + 4.0 * f(0.5 * (y1 + y2)) + f(y2));
    }
    let base = phi[((a - lo) / h).round() as usize];
    let out = par::map_slice(xs, |&x| {
        let g = |k: usize| {
            let y = lo + k as f64 * h;
            (x - y) * (x - y) / (4.0 * epsilon * t) + (phi[k] - base) / (2.0 * epsilon)
        };
        let gmin = (0..n).map(g).fold(f64::INFINITY, f64::min);
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            let y = lo + k as f64 * h;
            let w = (-(g(k) - gmin)).exp();
            num += (x - y) / t * w;
            den += w;
        }
        num / den
    });
    check_finite("classical Cole-Hopf", &out)?;
    Ok(out)
}
