//! Fractional operators on uniform grids: L1 Caputo, shifted Grünwald–Letnikov,
//! the Riesz fractional Laplacian, and the Riemann–Liouville integral.
//!
//! Every operator is built once as a [`FracOpPlan`] and then applied to grid
//! values. Values outside `[a, b]` are taken to be zero.

mod gamma;
mod grid;
mod plan;

pub use gamma::gamma;
pub use grid::UniformGrid;
pub use plan::{
    caputo_apply, frac_laplacian_apply, gl2_lambdas, gl_weights, l1_weights, rl_integral_apply,
    shifted_gl2_apply, shifted_gl_apply, Direction, FracKind, FracOpPlan, GlOrder, DEFAULT_SHIFT_P,
    DEFAULT_SHIFT_Q,
};
