//! Reference solutions and baselines: the fractional Hopf–Cole oracle for
//! FBENN, the classical Cole–Hopf formula, grid solvers for FBEFL, and the
//! Richardson truncation proxy.

mod fd;
mod hopf_cole;
mod proxy;

pub use fd::{central_diff_fbefl, godunov_flux, total_variation, upwind_fbefl, FdTrajectory};
pub use hopf_cole::{classical_cole_hopf, fbenn_exact, HopfCole, HopfColeConfig};
pub use proxy::{truncation_proxy, TruncationProxy};
