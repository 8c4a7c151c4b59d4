use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::fracops::UniformGrid;

/// Regularization parameter, either fixed or relative to `σ_max` of `√W·J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lambda {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// `(JᵀWJ + λ²I)γ = JᵀWf` by Cholesky (or its dual form when `N_C < N_P`).
    NormalCholesky,
    /// Householder QR of `[√W·J; λI]`.
    StackedQr,
    /// Filtered SVD; the only solver allowed with `λ = 0`.
    Svd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Trapezoid,
    Unit,
}

/// How `σ_min` and `σ_max` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Full eigendecomposition of the smaller Gram matrix when its side is at
    /// most `exact_sigma_max_dim`, power/inverse iteration above.
    Auto,
    Exact,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    pub lambda: Lambda,
    pub solver: Solver,
    pub weighting: Weighting,
    pub sigma: SigmaMode,
    pub exact_sigma_max_dim: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            lambda: Lambda::Relative(1e-6),
            solver: Solver::StackedQr,
            weighting: Weighting::Trapezoid,
            sigma: SigmaMode::Auto,
            exact_sigma_max_dim: 256,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        let l = match self.lambda {
            Lambda::Absolute(l) | Lambda::Relative(l) => l,
        };
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::Config(format!("regularization must be finite and >= 0, got {l}")));
        }
        if l == 0.0 && self.solver != Solver::Svd {
            return Err(Error::Config("lambda = 0 requires the svd solver".into()));
        }
        Ok(())
    }

    /// Quadrature weights used in the least-squares objective.
    pub fn weights(&self, grid: &UniformGrid) -> Vec<f64> {
        match self.weighting {
            Weighting::Trapezoid => grid.weights().to_vec(),
            Weighting::Unit => vec![1.0; grid.len()],
        }
    }
}

/// Result of one projection solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOutcome {
    pub gamma: Vec<f64>,
    /// `sqrt(‖Jγ − f‖_w² + λ²‖γ‖²)`.
    pub delta: f64,
    /// `‖Jγ − f‖_w`.
    pub ls_residual: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `σ_max² / (σ_max² + λ²)`.
    pub contraction: f64,
    pub lambda: f64,
    /// `‖Jγ‖_w`.
    pub applied_norm: f64,
    /// `‖f‖_w`.
    pub rhs_norm: f64,
    pub gamma_norm: f64,
}

pub fn weighted_norm(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt()
}

/// `d = f − Jγ`.
pub fn defect_values(j: &DMatrix<f64>, f: &[f64], gamma: &[f64]) -> Result<Vec<f64>> {
    check_len("defect rhs", j.nrows(), f.len())?;
    check_len("defect gamma", j.ncols(), gamma.len())?;
    let jg = j * DVector::from_column_slice(gamma);
    Ok(f.iter().zip(jg.iter()).map(|(a, b)| a - b).collect())
}

fn scaled(j: &DMatrix<f64>, f: &[f64], w: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut a = j.clone();
    for (i, s) in sw.iter().enumerate() {
        a.row_mut(i).scale_mut(*s);
    }
    let b = DVector::from_iterator(f.len(), f.iter().zip(&sw).map(|(x, s)| x * s));
    (a, b)
}

/// Gram matrix on the smaller side of `a`.
fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() >= a.ncols() {
        a.transpose() * a
    } else {
        a * a.transpose()
    }
}

fn sigmas_exact(g: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let mut s: Vec<f64> = eig.eigenvalues.iter().map(|&e| e.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn power_max(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * ((i * 7919) % 101) as f64);
    v.normalize_mut();
    let mut mu = 0.0;
    for _ in 0..500 {
        let w = g * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - mu).abs() <= 1e-12 * next.abs() {
            mu = next;
            break;
        }
        mu = next;
    }
    mu.max(0.0).sqrt()
}

/// Smallest eigenvalue of `g` by inverse iteration on `g + shift·I`.
fn inverse_min(g: &DMatrix<f64>, shift: f64) -> f64 {
    let n = g.nrows();
    let mut m = g.clone();
    for k in 0..n {
        m[(k, k)] += shift;
    }
    let Some(chol) = m.cholesky() else {
        return 0.0;
    };
    let mut v = DVector::from_fn(n, |i, _| 1.0 - 0.003 * ((i * 104_729) % 97) as f64);
    v.normalize_mut();
    let mut mu = 0.0;
    for _ in 0..500 {
        let w = chol.solve(&v);
        let norm = w.norm();
        if !(norm > 0.0) {
            break;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - mu).abs() <= 1e-14 * next.abs() {
            mu = next;
            break;
        }
        mu = next;
    }
    if mu > 0.0 {
        (1.0 / mu - shift).max(0.0).sqrt()
    } else {
        0.0
    }
}

/// Singular values of `√W·J`, descending. Only the `min(N_C, N_P)` nontrivial ones are returned.
pub fn singular_values(j: &DMatrix<f64>, w: &[f64]) -> Result<Vec<f64>> {
    check_len("quadrature weights", j.nrows(), w.len())?;
    let (a, _) = scaled(j, &vec![0.0; w.len()], w);
    Ok(sigmas_exact(&gram(&a)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub value: f64,
    /// Set when `λ = 0` and `σ_min < 1e-12`: the unregularized map is unbounded.
    pub infinite: bool,
}

/// `max_i σ_i / (σ_i² + λ²)`; with `λ = 0` this is `1/σ_min`.
pub fn sensitivity_from_sigmas(sigmas: &[f64], lambda: f64) -> Sensitivity {
    if lambda == 0.0 {
        let smin = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
        return Sensitivity {
            value: 1.0 / smin,
            infinite: !(smin >= 1e-12),
        };
    }
    let value = sigmas
        .iter()
        .map(|&s| s / (s * s + lambda * lambda))
        .fold(0.0, f64::max);
    Sensitivity { value, infinite: false }
}

pub fn sensitivity_bound(j: &DMatrix<f64>, w: &[f64], lambda: f64) -> Result<Sensitivity> {
    Ok(sensitivity_from_sigmas(&singular_values(j, w)?, lambda))
}

/// Solve the weighted, regularized least-squares problem for `γ`.
pub fn solve_projection(j: &DMatrix<f64>, f: &[f64], w: &[f64], cfg: &ProjectionConfig) -> Result<ProjectionOutcome> {
    cfg.validate()?;
    let (m, n) = j.shape();
    if m == 0 || n == 0 {
        return Err(Error::shape("projection system", 1, 0));
    }
    check_len("projection rhs", m, f.len())?;
    check_len("quadrature weights", m, w.len())?;
    if w.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Config("quadrature weights must be positive".into()));
    }
    check_finite("projection rhs", f)?;
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in the Jacobian".into()));
    }

    let (a, b) = scaled(j, f, w);
    let g = gram(&a);
    let exact = match cfg.sigma {
        SigmaMode::Exact => true,
        SigmaMode::Iterative => false,
        SigmaMode::Auto => g.nrows() <= cfg.exact_sigma_max_dim,
    };
    let (sigma_min, sigma_max, lambda) = if exact {
        let s = sigmas_exact(&g);
        let smax = s[0];
        let lambda = resolve_lambda(cfg.lambda, smax);
        (*s.last().unwrap(), smax, lambda)
    } else {
        let smax = power_max(&g);
        let lambda = resolve_lambda(cfg.lambda, smax);
        let shift = (lambda * lambda).max(1e-14 * smax * smax);
        (inverse_min(&g, shift), smax, lambda)
    };

    let gamma = match cfg.solver {
        Solver::Svd => solve_svd(&a, &b, lambda)?,
        Solver::StackedQr => solve_stacked_qr(&a, &b, lambda),
        Solver::NormalCholesky => match solve_normal(&a, &b, &g, lambda) {
            Some(gm) => gm,
            None => {
                warn!("normal equations not positive definite (lambda = {lambda:e}), falling back to SVD");
                solve_svd(&a, &b, lambda)?
            }
        },
    };
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite projection solution".into()));
    }

    let ag = &a * &gamma;
    let resid = (&ag - &b).norm();
    let gamma_norm = gamma.norm();
    let delta = (resid * resid + lambda * lambda * gamma_norm * gamma_norm).sqrt();
    let contraction = if sigma_max == 0.0 {
        0.0
    } else {
        sigma_max * sigma_max / (sigma_max * sigma_max + lambda * lambda)
    };
    Ok(ProjectionOutcome {
        gamma: gamma.iter().copied().collect(),
        delta,
        ls_residual: resid,
        sigma_min,
        sigma_max,
        contraction,
        lambda,
        applied_norm: ag.norm(),
        rhs_norm: b.norm(),
        gamma_norm,
    })
}

fn resolve_lambda(l: Lambda, sigma_max: f64) -> f64 {
    match l {
        Lambda::Absolute(v) => v,
        Lambda::Relative(r) => r * sigma_max,
    }
}

fn solve_normal(a: &DMatrix<f64>, b: &DVector<f64>, g: &DMatrix<f64>, lambda: f64) -> Option<DVector<f64>> {
    let mut reg = g.clone();
    for k in 0..reg.nrows() {
        reg[(k, k)] += lambda * lambda;
    }
    let chol = reg.cholesky()?;
    let out = if a.nrows() >= a.ncols() {
        chol.solve(&a.tr_mul(b))
    } else {
        // γ = Aᵀ(AAᵀ + λ²I)⁻¹ b, the same minimizer
        a.tr_mul(&chol.solve(b))
    };
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn solve_stacked_qr(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let (m, n) = a.shape();
    if m >= n || lambda == 0.0 {
        let mut rhs = DVector::zeros(m + n);
        rhs.rows_mut(0, m).copy_from(b);
        return stacked_ls(a, lambda, rhs);
    }
    // fewer rows than unknowns: γ = Aᵀz with z = argmin ‖[Aᵀ; λI]z − [0; b/λ]‖
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(n, m).copy_from(&(b / lambda));
    a.transpose() * stacked_ls(&a.transpose(), lambda, rhs)
}

/// Least-squares solution of `[top; λI] x ≈ rhs` by Householder QR.
fn stacked_ls(top: &DMatrix<f64>, lambda: f64, mut rhs: DVector<f64>) -> DVector<f64> {
    let (m, n) = top.shape();
    let mut stacked = DMatrix::zeros(m + n, n);
    stacked.view_mut((0, 0), (m, n)).copy_from(top);
    for k in 0..n {
        stacked[(m + k, k)] = lambda;
    }
    let qr = stacked.qr();
    qr.q_tr_mul(&mut rhs);
    let r = qr.r();
    let mut x = rhs.rows(0, n).into_owned();
    // back substitution; a zero pivot (λ = 0, rank deficient) leaves that component at 0
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= r[(i, k)] * x[k];
        }
        x[i] = if r[(i, i)] != 0.0 { s / r[(i, i)] } else { 0.0 };
    }
    x
}

fn solve_svd(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| Error::Numerical("svd failed".into()))?;
    let vt = svd.v_t.as_ref().ok_or_else(|| Error::Numerical("svd failed".into()))?;
    let smax = svd.singular_values.max();
    let cutoff = f64::EPSILON * smax * a.nrows().max(a.ncols()) as f64;
    let utb = u.tr_mul(b);
    let mut coef = DVector::zeros(svd.singular_values.len());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        coef[k] = if lambda > 0.0 {
            s / (s * s + lambda * lambda) * utb[k]
        } else if s > cutoff {
            utb[k] / s
        } else {
            0.0
        };
    }
    Ok(vt.tr_mul(&coef))
}
