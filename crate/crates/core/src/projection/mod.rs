//! Regularized tangent-space projection.
//!
//! Given the parameter Jacobian `J` at the collocation points and the
//! right-hand side `f`, find `γ` minimizing `‖√W(Jγ − f)‖² + λ²‖γ‖²` and report
//! the residual `δ`, the singular-value range of `√W·J`, and the contraction
//! factor of the projection.

mod solve;

pub use solve::{
    defect_values, sensitivity_bound, sensitivity_from_sigmas, singular_values, solve_projection,
    weighted_norm, Lambda, ProjectionConfig, ProjectionOutcome, Sensitivity, SigmaMode, Solver,
    Weighting,
};
