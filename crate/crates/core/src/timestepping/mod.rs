//! Explicit integrators for the parameter dynamics `q̇ = γ(q, t)`.
//!
//! Fixed-step SSP-RK3 in Shu–Osher form and adaptive Dormand–Prince 5(4)
//! with an elementary I-controller. [`march`] drives either one to `t_end`.

mod march;
mod rk;

pub use march::{march, MarchResult, Scheme, StepDiagnostics, StepProbe, StepperConfig};
pub use rk::{rk45_step, rk45_trial, ssp_rk3_step, Flow, FnFlow, Rk45Step};
