//! The STNP loop: fit `q(0)`, then march `q̇ = γ(q, t)` where `γ` is the
//! regularized projection of the model right-hand side onto the tangent space
//! of the ansatz.

mod flow;
mod run;

pub use flow::{ContractStats, StnpFlow};
pub use run::{run, run_from, DiagnosticsConfig, RunOutput, RunReport, StnpProblem};
