use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::init::init_xavier;
use super::network::{Ansatz, ParamVector};
use crate::error::{check_len, Error, Result};

/// Budget and hyperparameters for the initial-condition fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub adam_iters: usize,
    pub lr: f64,
    /// Learning rate reached at the last Adam iteration (geometric decay from `lr`).
    pub lr_final: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Damped Gauss-Newton iterations run after Adam. 0 disables the polish.
    pub lm_iters: usize,
    /// Stop as soon as the mean squared misfit drops below this.
    pub target_mse: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            adam_iters: 5000,
            lr: 1e-2,
            lr_final: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            lm_iters: 300,
            target_mse: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: ParamVector,
    pub mse: f64,
    pub adam_iters: usize,
    pub lm_iters: usize,
}

/// Fit `û(·, t0)` to samples of `u0`, starting from the Xavier initialization of the spec.
pub fn fit_initial(ansatz: &Ansatz, xs: &[f64], u0: &[f64], t0: f64, opt: &OptimizerConfig) -> Result<FitOutcome> {
    let q = init_xavier(ansatz.spec());
    fit_from(ansatz, q, xs, u0, t0, opt)
}

fn mse_of(ansatz: &Ansatz, q: &[f64], xs: &[f64], u0: &[f64], t0: f64) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
    let (u, j) = ansatz.values_and_jacobian(q, xs, t0)?;
    let r: Vec<f64> = u.iter().zip(u0).map(|(a, b)| a - b).collect();
    let mse = r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64;
    Ok((mse, r, j))
}

/// Adam on the mean squared misfit, then an optional damped Gauss-Newton polish.
/// Returns the best parameters seen.
pub fn fit_from(
    ansatz: &Ansatz,
    q0: ParamVector,
    xs: &[f64],
    u0: &[f64],
    t0: f64,
    opt: &OptimizerConfig,
) -> Result<FitOutcome> {
    check_len("initial samples", xs.len(), u0.len())?;
    check_len("parameter vector", ansatz.n_params(), q0.len())?;
    if xs.is_empty() {
        return Err(Error::Config("initial fit needs at least one sample".into()));
    }
    let np = ansatz.n_params();
    if 2 * xs.len() < np {
        warn!("initial fit: {} samples for {} parameters", xs.len(), np);
    }
    let n = xs.len() as f64;
    let mut q = q0.0;
    let mut best = q.clone();
    let mut best_mse = f64::INFINITY;
    let mut m = vec![0.0; np];
    let mut v = vec![0.0; np];
    let decay = if opt.adam_iters > 1 && opt.lr > 0.0 {
        (opt.lr_final / opt.lr).ln() / (opt.adam_iters - 1) as f64
    } else {
        0.0
    };
    let mut adam_done = 0;
    for it in 0..opt.adam_iters {
        let (mse, r, j) = mse_of(ansatz, &q, xs, u0, t0)?;
        if !mse.is_finite() {
            return Err(Error::FitDiverged {
                iteration: it,
                last_finite: best,
            });
        }
        if mse < best_mse {
            best_mse = mse;
            best.copy_from_slice(&q);
        }
        if mse <= opt.target_mse {
            break;
        }
        let rv = DVector::from_vec(r);
        let g = j.tr_mul(&rv) * (2.0 / n);
        let lr = opt.lr * (decay * it as f64).exp();
        let b1t = 1.0 - opt.beta1.powi(it as i32 + 1);
        let b2t = 1.0 - opt.beta2.powi(it as i32 + 1);
        for k in 0..np {
            m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g[k];
            v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g[k] * g[k];
            q[k] -= lr * (m[k] / b1t) / ((v[k] / b2t).sqrt() + opt.eps);
        }
        adam_done = it + 1;
        if it % 1000 == 0 {
            debug!("adam {it}: mse {mse:.3e}");
        }
    }
    if opt.adam_iters > 0 {
        let (mse, _, _) = mse_of(ansatz, &q, xs, u0, t0)?;
        if mse.is_finite() && mse < best_mse {
            best_mse = mse;
            best.copy_from_slice(&q);
        }
    } else {
        best_mse = mse_of(ansatz, &q, xs, u0, t0)?.0;
    }

    let mut lm_done = 0;
    if opt.lm_iters > 0 && best_mse > opt.target_mse {
        let (q_lm, mse_lm, iters) = levenberg_marquardt(ansatz, best.clone(), best_mse, xs, u0, t0, opt)?;
        lm_done = iters;
        if mse_lm < best_mse {
            best = q_lm;
            best_mse = mse_lm;
        }
    }
    debug!("initial fit: mse {best_mse:.3e} after {adam_done} Adam + {lm_done} LM iterations");
    Ok(FitOutcome {
        params: ParamVector(best),
        mse: best_mse,
        adam_iters: adam_done,
        lm_iters: lm_done,
    })
}

fn levenberg_marquardt(
    ansatz: &Ansatz,
    mut q: Vec<f64>,
    mut mse: f64,
    xs: &[f64],
    u0: &[f64],
    t0: f64,
    opt: &OptimizerConfig,
) -> Result<(Vec<f64>, f64, usize)> {
    // damping update after Nielsen: shrink on good agreement, double the growth on failure
    let np = q.len();
    let n = xs.len() as f64;
    let (_, mut r, mut j) = mse_of(ansatz, &q, xs, u0, t0)?;
    let mut jtj = j.transpose() * &j;
    let mut mu = 1e-3 * jtj.diagonal().max().max(1e-300);
    let mut nu = 2.0;
    let mut done = 0;
    for it in 0..opt.lm_iters {
        done = it + 1;
        let g = j.tr_mul(&DVector::from_column_slice(&r));
        let mut a = jtj.clone();
        for k in 0..np {
            a[(k, k)] += mu;
        }
        let Some(chol) = a.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let step = chol.solve(&g);
        let trial: Vec<f64> = q.iter().zip(step.iter()).map(|(a, s)| a - s).collect();
        let (m2, r2, j2) = mse_of(ansatz, &trial, xs, u0, t0)?;
        let predicted = step.dot(&(step.scale(mu) + &g)) / n;
        let rho = if predicted > 0.0 { (mse - m2) / predicted } else { -1.0 };
        if m2.is_finite() && rho > 0.0 {
            q = trial;
            mse = m2;
            r = r2;
            j = j2;
            jtj = j.transpose() * &j;
            mu *= f64::max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
        }
        if mse <= opt.target_mse || !mu.is_finite() || step.norm() <= 1e-15 * (1.0 + q.iter().map(|v| v * v).sum::<f64>().sqrt()) {
            break;
        }
    }
    Ok((q, mse, done))
}
