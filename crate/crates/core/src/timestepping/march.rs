use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::rk::{rk45_step, ssp_rk3_step, Flow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SspRk3,
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Fixed step for SSP-RK3, initial step for RK45.
    pub dt: f64,
    pub t_end: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub safety: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::SspRk3,
            dt: 1e-3,
            t_end: 1.0,
            abs_tol: 1e-6,
            rel_tol: 1e-6,
            dt_min: 1e-10,
            dt_max: 0.1,
            safety: 0.9,
        }
    }
}

impl StepperConfig {
    pub fn ssp_rk3(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            dt_min: dt.min(1e-10),
            dt_max: dt.max(0.1),
            ..Default::default()
        }
    }

    pub fn rk45(t_end: f64) -> Self {
        Self {
            scheme: Scheme::Rk45,
            t_end,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt && self.dt <= self.dt_max) {
            return bad("need 0 < dt_min <= dt <= dt_max");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return bad("safety must lie in (0, 1)");
        }
        if !self.t_end.is_finite() {
            return bad("t_end must be finite");
        }
        Ok(())
    }
}

/// Quantities a flow reports about an accepted step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepProbe {
    pub delta: f64,
    pub energy: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub contraction: f64,
    pub trunc_proxy: f64,
    pub ls_residual: f64,
    /// `max(‖û‖_∞, ‖û_x‖_∞)`.
    pub w1inf: f64,
}

/// Per-step record. `delta` and the spectral quantities are from the first
/// stage of the step; `energy` is `‖û‖_w` at the end of the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub dt: f64,
    pub accepted: bool,
    pub error_estimate: f64,
    pub delta: f64,
    pub energy: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub contraction: f64,
    pub trunc_proxy: f64,
    pub ls_residual: f64,
    pub w1inf: f64,
}

impl StepDiagnostics {
    fn new(t: f64, dt: f64, error_estimate: f64, p: StepProbe) -> Self {
        Self {
            t,
            dt,
            accepted: true,
            error_estimate,
            delta: p.delta,
            energy: p.energy,
            sigma_min: p.sigma_min,
            sigma_max: p.sigma_max,
            contraction: p.contraction,
            trunc_proxy: p.trunc_proxy,
            ls_residual: p.ls_residual,
            w1inf: p.w1inf,
        }
    }
}

#[derive(Debug)]
pub struct MarchResult {
    pub q: Vec<f64>,
    pub t: f64,
    /// Accepted steps only.
    pub steps: Vec<StepDiagnostics>,
    pub rejected: usize,
    /// Step size the controller proposes next (RK45), or the fixed step.
    pub dt_next: f64,
    /// Set when the march stopped early; `q`, `t` and `steps` hold the state up to the failure.
    pub error: Option<Error>,
}

/// Integrate from `t0` to `cfg.t_end`, landing exactly on `t_end`.
///
/// `observer` sees every accepted step. Errors do not discard the trajectory:
/// they are returned in [`MarchResult::error`].
pub fn march<F, O>(q0: &[f64], t0: f64, cfg: &StepperConfig, flow: &mut F, mut observer: O) -> Result<MarchResult>
where
    F: Flow + ?Sized,
    O: FnMut(&[f64], &StepDiagnostics),
{
    cfg.validate()?;
    let mut q = q0.to_vec();
    let mut t = t0;
    let mut steps = Vec::new();
    let mut rejected = 0;
    let mut dt = cfg.dt;
    let t_end = cfg.t_end;
    let eps = 1e-14 * t_end.abs().max(1.0);
    let mut error = None;

    while t_end - t > eps {
        let remaining = t_end - t;
        let outcome: Result<(Vec<f64>, f64, f64)> = match cfg.scheme {
            Scheme::SspRk3 => {
                // snap the last step onto t_end instead of leaving a sliver
                let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
                ssp_rk3_step(&q, t, h, flow).map(|qn| (qn, h, 0.0))
            }
            Scheme::Rk45 => {
                let h = dt.min(remaining);
                match rk45_step(&q, t, h, flow, cfg) {
                    Ok(s) if s.accepted => {
                        if h >= dt * (1.0 - 1e-12) || s.dt_next < dt {
                            dt = s.dt_next;
                        }
                        Ok((s.q_next, h, s.error))
                    }
                    Ok(s) => {
                        rejected += 1;
                        dt = s.dt_next;
                        if dt < cfg.dt_min {
                            Err(Error::StepFailure { t, dt, error: s.error })
                        } else {
                            debug!("rk45 reject at t = {t:.6}: error {:.3e}, dt -> {dt:.3e}", s.error);
                            continue;
                        }
                    }
                    Err(e) => Err(e),
                }
            }
        };
        let (q_next, h, err_est) = match outcome {
            Ok(v) => v,
            Err(e) => {
                warn!("march stopped at t = {t}: {e}");
                error = Some(e);
                break;
            }
        };
        let t_next = if t_end - (t + h) <= eps { t_end } else { t + h };
        let probe = match flow.probe(&q, t, &q_next, t_next) {
            Ok(p) => p,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let d = StepDiagnostics::new(t_next, h, err_est, probe);
        q = q_next;
        t = t_next;
        observer(&q, &d);
        steps.push(d);
    }
    Ok(MarchResult {
        q,
        t,
        steps,
        rejected,
        dt_next: dt,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timestepping::FnFlow;

    #[test]
    fn zero_length_interval() {
        let mut f = FnFlow(|q: &[f64], _| q.to_vec());
        let cfg = StepperConfig::ssp_rk3(0.1, 0.0);
        let r = march(&[1.0, 2.0], 0.0, &cfg, &mut f, |_, _| {}).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.q, vec![1.0, 2.0]);
    }

    #[test]
    fn fixed_step_count_and_landing() {
        let mut f = FnFlow(|q: &[f64], _| q.iter().map(|v| -v).collect());
        let cfg = StepperConfig::ssp_rk3(1e-3, 1.0);
        let mut seen = 0;
        let r = march(&[1.0], 0.0, &cfg, &mut f, |_, _| seen += 1).unwrap();
        assert_eq!(r.steps.len(), 1000);
        assert_eq!(seen, 1000);
        assert_eq!(r.t, 1.0);
    }

    #[test]
    fn adaptive_lands_on_end() {
        let mut f = FnFlow(|q: &[f64], _| q.iter().map(|v| -v).collect());
        let mut cfg = StepperConfig::rk45(0.77);
        cfg.dt = 0.05;
        let r = march(&[1.0], 0.0, &cfg, &mut f, |_, _| {}).unwrap();
        assert!((r.t - 0.77).abs() <= 1e-14 * 0.77);
        assert!(r.steps.iter().all(|s| s.error_estimate <= 1.0));
    }

    #[test]
    fn failure_keeps_partial_trajectory() {
        let mut f = FnFlow(|_: &[f64], t: f64| vec![if t > 0.25 { f64::INFINITY } else { 1.0 }]);
        let cfg = StepperConfig::ssp_rk3(0.1, 1.0);
        let r = march(&[0.0], 0.0, &cfg, &mut f, |_, _| {}).unwrap();
        assert!(r.error.is_some());
        assert_eq!(r.steps.len(), 2);
        assert!((r.t - 0.2).abs() < 1e-15);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut f = FnFlow(|q: &[f64], _| q.to_vec());
        let mut cfg = StepperConfig::rk45(1.0);
        cfg.safety = 1.5;
        assert!(march(&[1.0], 0.0, &cfg, &mut f, |_, _| {}).is_err());
    }
}
