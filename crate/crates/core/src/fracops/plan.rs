use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::gamma;
use super::grid::UniformGrid;
use crate::error::{check_len, Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FracKind {
    CaputoL1,
    GlShifted1,
    GlShifted2,
    RlIntegral,
    FracLaplacian,
}

/// Which Riemann–Liouville derivative a shifted GL plan approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `_{-∞}D_x^α`, history to the left of `x`.
    Left,
    /// `_xD_{+∞}^α`, history to the right of `x`.
    Right,
}

/// Accuracy order of the Grünwald–Letnikov approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlOrder {
    First,
    Second,
}

pub const DEFAULT_SHIFT_P: i64 = 1;
pub const DEFAULT_SHIFT_Q: i64 = 0;

/// L1 weights `a_l = (l+1)^{1-α} - l^{1-α}`, `l = 0..n`.
pub fn l1_weights(alpha: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("L1 scheme needs α in (0,1), got {alpha}")));
    }
    let e = 1.0 - alpha;
    Ok((0..n)
        .map(|l| {
            let l = l as f64;
            (l + 1.0).powf(e) - l.powf(e)
        })
        .collect())
}

/// Grünwald–Letnikov weights `g_k = (-1)^k C(α, k)`, `k = 0..=k_max`, by the
/// recursion `g_k = (1 - (α+1)/k) g_{k-1}`.
pub fn gl_weights(alpha: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("GL weights need α in (0,2], got {alpha}")));
    }
    let mut g = Vec::with_capacity(k_max + 1);
    g.push(1.0);
    for k in 1..=k_max {
        let prev = g[k - 1];
        g.push((1.0 - (alpha + 1.0) / k as f64) * prev);
    }
    Ok(g)
}

/// `(λ1, λ2)` of the second-order shifted combination.
pub fn gl2_lambdas(alpha: f64, p: i64, q: i64) -> Result<(f64, f64)> {
    if p == q {
        return Err(Error::Domain(format!("second-order GL needs p ≠ q, got p = q = {p}")));
    }
    let d = 2.0 * (p - q) as f64;
    Ok(((alpha - 2.0 * q as f64) / d, (2.0 * p as f64 - alpha) / d))
}

/// A precomputed nonlocal operator on one uniform grid.
///
/// GL-type kinds (`GlShifted1`, `GlShifted2`, `FracLaplacian`) are stored as a
/// dense Toeplitz stencil; application is a direct `O(n²)` convolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FracOpPlan {
    pub kind: FracKind,
    pub order: f64,
    pub h: f64,
    pub n: usize,
    /// `a_l` (L1), `g_k` (GL kinds) or the product-integration kernel (RL integral).
    pub weights: Vec<f64>,
    pub shift_p: i64,
    pub shift_q: i64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub direction: Direction,
    scale: f64,
    // Toeplitz coefficients: stencil[n - 1 + m] multiplies u_{i+m}.
    stencil: Vec<f64>,
    // RL integral: weight of u_0 for each output node.
    first: Vec<f64>,
}

impl FracOpPlan {
    fn blank(kind: FracKind, order: f64, grid: &UniformGrid) -> Self {
        Self {
            kind,
            order,
            h: grid.h(),
            n: grid.len(),
            weights: Vec::new(),
            shift_p: 0,
            shift_q: 0,
            lambda1: 1.0,
            lambda2: 0.0,
            direction: Direction::Left,
            scale: 1.0,
            stencil: Vec::new(),
            first: Vec::new(),
        }
    }

    /// L1 discretization of the left Caputo derivative of order `alpha ∈ (0,1)`.
    pub fn caputo_l1(alpha: f64, grid: &UniformGrid) -> Result<Self> {
        let weights = l1_weights(alpha, grid.len())?;
        let mut plan = Self::blank(FracKind::CaputoL1, alpha, grid);
        plan.scale = grid.h().powf(-alpha) / gamma(2.0 - alpha)?;
        plan.weights = weights;
        Ok(plan)
    }

    /// Product-trapezoid quadrature of the left RL integral of order `beta ∈ (0,1]`.
    ///
    /// The kernel `ω_β` is integrated exactly against the piecewise-linear
    /// interpolant of `u`, so constants and linear functions are reproduced
    /// without quadrature error.
    pub fn rl_integral(beta: f64, grid: &UniformGrid) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("RL integral needs β in (0,1], got {beta}")));
        }
        let n = grid.len();
        let e = beta + 1.0;
        let mut plan = Self::blank(FracKind::RlIntegral, beta, grid);
        plan.scale = grid.h().powf(beta) / gamma(beta + 2.0)?;
        plan.weights = (0..n)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    let m = m as f64;
                    (m + 1.0).powf(e) - 2.0 * m.powf(e) + (m - 1.0).powf(e)
                }
            })
            .collect();
        plan.first = (0..n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    let k = k as f64;
                    (k - 1.0).powf(e) - (k - 1.0 - beta) * k.powf(beta)
                }
            })
            .collect();
        Ok(plan)
    }

    /// First-order shifted GL approximation `A^α_{h,p}` with zero exterior extension.
    pub fn gl_shifted1(alpha: f64, grid: &UniformGrid, p: i64, direction: Direction) -> Result<Self> {
        let n = grid.len();
        let g = gl_weights(alpha, n + p.unsigned_abs() as usize)?;
        let mut plan = Self::blank(FracKind::GlShifted1, alpha, grid);
        plan.shift_p = p;
        plan.direction = direction;
        plan.stencil = gl_stencil(&g, n, &[(p, 1.0)], direction, grid.h().powf(-alpha));
        plan.weights = g;
        Ok(plan)
    }

    /// Second-order combination `λ1 A^α_{h,p} + λ2 A^α_{h,q}`.
    pub fn gl_shifted2(
        alpha: f64,
        grid: &UniformGrid,
        p: i64,
        q: i64,
        direction: Direction,
    ) -> Result<Self> {
        let (l1, l2) = gl2_lambdas(alpha, p, q)?;
        let n = grid.len();
        let g = gl_weights(alpha, n + p.unsigned_abs().max(q.unsigned_abs()) as usize)?;
        let mut plan = Self::blank(FracKind::GlShifted2, alpha, grid);
        plan.shift_p = p;
        plan.shift_q = q;
        plan.lambda1 = l1;
        plan.lambda2 = l2;
        plan.direction = direction;
        plan.stencil = gl_stencil(&g, n, &[(p, l1), (q, l2)], direction, grid.h().powf(-alpha));
        plan.weights = g;
        Ok(plan)
    }

    /// Riesz fractional Laplacian `(-Δ)^{α/2}`, `α ∈ (1,2]`, as the scaled sum of the
    /// left and right RL derivatives. `α = 2` uses the three-point stencil of `-u''`.
    pub fn frac_laplacian(alpha: f64, grid: &UniformGrid, order: GlOrder) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::Domain(format!(
                "fractional Laplacian needs α in (1,2], got {alpha}"
            )));
        }
        let n = grid.len();
        let h = grid.h();
        let mut plan = Self::blank(FracKind::FracLaplacian, alpha, grid);
        if alpha == 2.0 {
            let mut stencil = vec![0.0; 2 * n - 1];
            let c = n - 1;
            stencil[c] = 2.0 / (h * h);
            if n > 1 {
                stencil[c - 1] = -1.0 / (h * h);
                stencil[c + 1] = -1.0 / (h * h);
            }
            plan.stencil = stencil;
            plan.weights = vec![1.0, -2.0, 1.0];
            return Ok(plan);
        }
        let shifts: Vec<(i64, f64)> = match order {
            GlOrder::First => vec![(DEFAULT_SHIFT_P, 1.0)],
            GlOrder::Second => {
                let (l1, l2) = gl2_lambdas(alpha, DEFAULT_SHIFT_P, DEFAULT_SHIFT_Q)?;
                plan.lambda1 = l1;
                plan.lambda2 = l2;
                plan.shift_q = DEFAULT_SHIFT_Q;
                vec![(DEFAULT_SHIFT_P, l1), (DEFAULT_SHIFT_Q, l2)]
            }
        };
        plan.shift_p = DEFAULT_SHIFT_P;
        let g = gl_weights(alpha, n + 1)?;
        let riesz = 1.0 / (2.0 * (alpha * PI / 2.0).cos());
        let scale = h.powf(-alpha);
        let left = gl_stencil(&g, n, &shifts, Direction::Left, scale);
        let right = gl_stencil(&g, n, &shifts, Direction::Right, scale);
        plan.stencil = left.iter().zip(&right).map(|(l, r)| riesz * (l + r)).collect();
        plan.weights = g;
        plan.scale = riesz;
        Ok(plan)
    }

    /// Apply the operator to grid values (length must equal the plan's grid size).
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("fractional operator input", self.n, u.len())?;
        let map = |n: usize, f: &(dyn Fn(usize) -> f64 + Sync)| par::map_indices(n, f);
        Ok(match self.kind {
            FracKind::CaputoL1 => self.apply_caputo(u, map),
            FracKind::RlIntegral => self.apply_rl_integral(u, map),
            _ => self.apply_toeplitz(u, map),
        })
    }

    /// Same as [`apply`](Self::apply) but always on the calling thread.
    pub fn apply_sequential(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("fractional operator input", self.n, u.len())?;
        let seq = |n: usize, f: &(dyn Fn(usize) -> f64 + Sync)| par::map_indices_sequential(n, f);
        Ok(match self.kind {
            FracKind::CaputoL1 => self.apply_caputo(u, seq),
            FracKind::RlIntegral => self.apply_rl_integral(u, seq),
            _ => self.apply_toeplitz(u, seq),
        })
    }

    /// Dense matrix of the operator, row-major (`n × n`). Used by tests and diagnostics.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.n;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(self.apply_sequential(&e)?);
        }
        Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
    }

    fn apply_toeplitz<M>(&self, u: &[f64], map: M) -> Vec<f64>
    where
        M: Fn(usize, &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>,
    {
        let n = self.n;
        let st = &self.stencil;
        map(n, &|i| {
            let row = &st[n - 1 - i..2 * n - 1 - i];
            row.iter().zip(u).map(|(c, v)| c * v).sum()
        })
    }

    fn apply_caputo<M>(&self, u: &[f64], map: M) -> Vec<f64>
    where
        M: Fn(usize, &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>,
    {
        let du: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
        let a = &self.weights;
        let scale = self.scale;
        map(self.n, &|i| {
            // Σ_{j<i} a_j (u_{i-j} - u_{i-j-1})
            let mut s = 0.0;
            for j in 0..i {
                s += a[j] * du[i - 1 - j];
            }
            scale * s
        })
    }

    fn apply_rl_integral<M>(&self, u: &[f64], map: M) -> Vec<f64>
    where
        M: Fn(usize, &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>,
    {
        let b = &self.weights;
        let first = &self.first;
        let scale = self.scale;
        map(self.n, &|i| {
            if i == 0 {
                return 0.0;
            }
            let mut s = first[i] * u[0] + u[i];
            for k in 1..i {
                s += b[i - k] * u[k];
            }
            scale * s
        })
    }
}

// Toeplitz stencil of Σ_s c_s A^α_{h,s}, truncated to a grid of n nodes.
fn gl_stencil(g: &[f64], n: usize, shifts: &[(i64, f64)], direction: Direction, scale: f64) -> Vec<f64> {
    let mut st = vec![0.0; 2 * n - 1];
    let lo = -(n as i64 - 1);
    let hi = n as i64 - 1;
    for &(p, c) in shifts {
        for m in lo..=hi {
            // Left: u(x - (k-p)h) has offset m = p - k. Right mirrors it.
            let k = match direction {
                Direction::Left => p - m,
                Direction::Right => p + m,
            };
            if k >= 0 && (k as usize) < g.len() {
                st[(m + n as i64 - 1) as usize] += scale * c * g[k as usize];
            }
        }
    }
    st
}

/// L1 approximation of the left Caputo derivative at every grid node (0 at `x_0`).
pub fn caputo_apply(u: &[f64], alpha: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    FracOpPlan::caputo_l1(alpha, grid)?.apply(u)
}

/// `A^α_{h,p} u` with zero extension outside the grid.
pub fn shifted_gl_apply(
    u: &[f64],
    alpha: f64,
    grid: &UniformGrid,
    p: i64,
    direction: Direction,
) -> Result<Vec<f64>> {
    FracOpPlan::gl_shifted1(alpha, grid, p, direction)?.apply(u)
}

pub fn shifted_gl2_apply(
    u: &[f64],
    alpha: f64,
    grid: &UniformGrid,
    p: i64,
    q: i64,
    direction: Direction,
) -> Result<Vec<f64>> {
    FracOpPlan::gl_shifted2(alpha, grid, p, q, direction)?.apply(u)
}

pub fn frac_laplacian_apply(
    u: &[f64],
    alpha: f64,
    grid: &UniformGrid,
    order: GlOrder,
) -> Result<Vec<f64>> {
    FracOpPlan::frac_laplacian(alpha, grid, order)?.apply(u)
}

pub fn rl_integral_apply(u: &[f64], beta: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    FracOpPlan::rl_integral(beta, grid)?.apply(u)
}
