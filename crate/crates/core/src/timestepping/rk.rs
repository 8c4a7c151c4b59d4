use crate::error::{check_len, Error, Result};

use super::march::{StepProbe, StepperConfig};

/// The right-hand side of the parameter ODE.
pub trait Flow {
    /// `γ(q, t)`. `stage` is the Runge-Kutta stage index within the current step.
    fn rate(&mut self, q: &[f64], t: f64, stage: usize) -> Result<Vec<f64>>;

    /// Called once per accepted step with the state at its start and the new state.
    fn probe(&mut self, _q_prev: &[f64], _t_prev: f64, _q_next: &[f64], _t_next: f64) -> Result<StepProbe> {
        Ok(StepProbe::default())
    }
}

/// A [`Flow`] from a closure.
pub struct FnFlow<F>(pub F);

impl<F> Flow for FnFlow<F>
where
    F: FnMut(&[f64], f64) -> Vec<f64>,
{
    fn rate(&mut self, q: &[f64], t: f64, _stage: usize) -> Result<Vec<f64>> {
        Ok((self.0)(q, t))
    }
}

fn stage_rate<F: Flow + ?Sized>(flow: &mut F, q: &[f64], t: f64, stage: usize) -> Result<Vec<f64>> {
    let k = flow.rate(q, t, stage).map_err(|e| match e {
        e @ Error::AtStage { .. } => e,
        e => Error::AtStage {
            t,
            stage,
            source: Box::new(e),
        },
    })?;
    check_len("stage rate", q.len(), k.len())?;
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::AtStage {
            t,
            stage,
            source: Box::new(Error::Numerical(format!("non-finite rate at stage {stage}"))),
        });
    }
    Ok(k)
}

fn axpy(q: &[f64], dt: f64, k: &[f64]) -> Vec<f64> {
    q.iter().zip(k).map(|(a, b)| a + dt * b).collect()
}

/// One SSP-RK3 step:
/// `q¹ = q + Δt·γ(q,t)`, `q² = ¾q + ¼(q¹ + Δt·γ(q¹,t+Δt))`, `q⁺ = ⅓q + ⅔(q² + Δt·γ(q²,t+Δt/2))`.
pub fn ssp_rk3_step<F: Flow + ?Sized>(q: &[f64], t: f64, dt: f64, flow: &mut F) -> Result<Vec<f64>> {
    let k0 = stage_rate(flow, q, t, 0)?;
    let q1 = axpy(q, dt, &k0);
    let k1 = stage_rate(flow, &q1, t + dt, 1)?;
    let q2: Vec<f64> = (0..q.len()).map(|i| 0.75 * q[i] + 0.25 * (q1[i] + dt * k1[i])).collect();
    let k2 = stage_rate(flow, &q2, t + 0.5 * dt, 2)?;
    Ok((0..q.len())
        .map(|i| q[i] / 3.0 + 2.0 / 3.0 * (q2[i] + dt * k2[i]))
        .collect())
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Fifth- and fourth-order Dormand-Prince solutions after one step of size `dt`.
pub fn rk45_trial<F: Flow + ?Sized>(q: &[f64], t: f64, dt: f64, flow: &mut F) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut y = q.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..n {
                    y[i] += dt * a * kj[i];
                }
            }
        }
        k.push(stage_rate(flow, &y, t + C[s] * dt, s)?);
    }
    let combine = |b: &[f64; 7]| -> Vec<f64> {
        (0..n)
            .map(|i| q[i] + dt * (0..7).map(|s| b[s] * k[s][i]).sum::<f64>())
            .collect()
    };
    Ok((combine(&B5), combine(&B4)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rk45Step {
    pub q_next: Vec<f64>,
    pub t_next: f64,
    pub dt_next: f64,
    pub accepted: bool,
    /// RMS of `(q₅ − q₄)` scaled by `abs_tol + rel_tol·max(|q|, |q₅|)`.
    pub error: f64,
}

/// One Dormand-Prince attempt. A rejected step returns `q` unchanged and `t_next = t`.
pub fn rk45_step<F: Flow + ?Sized>(q: &[f64], t: f64, dt: f64, flow: &mut F, cfg: &StepperConfig) -> Result<Rk45Step> {
    let (q5, q4) = rk45_trial(q, t, dt, flow)?;
    let n = q.len().max(1) as f64;
    let sum: f64 = (0..q.len())
        .map(|i| {
            let sc = cfg.abs_tol + cfg.rel_tol * q[i].abs().max(q5[i].abs());
            let e = (q5[i] - q4[i]) / sc;
            e * e
        })
        .sum();
    let error = (sum / n).sqrt();
    let factor = if error == 0.0 {
        5.0
    } else {
        (cfg.safety * error.powf(-0.2)).clamp(0.2, 5.0)
    };
    let dt_next = (dt * factor).clamp(cfg.dt_min, cfg.dt_max);
    if error <= 1.0 {
        Ok(Rk45Step {
            q_next: q5,
            t_next: t + dt,
            dt_next,
            accepted: true,
            error,
        })
    } else {
        Ok(Rk45Step {
            q_next: q.to_vec(),
            t_next: t,
            dt_next: (dt * factor).min(cfg.dt_max),
            accepted: false,
            error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rate_is_exact() {
        let c = [0.3, -1.25];
        let mut f = FnFlow(|_: &[f64], _| c.to_vec());
        let q = [1.0, 2.0];
        let out = ssp_rk3_step(&q, 0.0, 0.1, &mut f).unwrap();
        for i in 0..2 {
            assert!((out[i] - (q[i] + 0.1 * c[i])).abs() < 1e-15);
        }
        let (q5, q4) = rk45_trial(&q, 0.0, 0.1, &mut f).unwrap();
        for i in 0..2 {
            assert!((q5[i] - (q[i] + 0.1 * c[i])).abs() < 1e-15);
            assert!((q4[i] - (q[i] + 0.1 * c[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rate_grows_step() {
        let mut f = FnFlow(|q: &[f64], _| vec![0.0; q.len()]);
        let cfg = StepperConfig::rk45(1.0);
        let s = rk45_step(&[1.0], 0.0, 0.01, &mut f, &cfg).unwrap();
        assert!(s.accepted);
        assert_eq!(s.error, 0.0);
        assert!((s.dt_next - 0.05).abs() < 1e-15);
    }

    #[test]
    fn tableau_rows_sum_to_nodes() {
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-14);
        }
        assert!((B5.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_stage_is_annotated() {
        let mut f = FnFlow(|_: &[f64], t: f64| vec![if t > 0.0 { f64::NAN } else { 1.0 }]);
        let err = ssp_rk3_step(&[0.0], 0.0, 0.1, &mut f).unwrap_err();
        assert!(matches!(err, Error::AtStage { stage: 1, .. }));
        assert!(matches!(err.root(), Error::Numerical(_)));
    }
}
