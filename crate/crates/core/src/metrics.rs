//! Error measures shared by the experiments.

use crate::error::{check_len, Result};
use crate::fracops::UniformGrid;

/// Number of nodes of the uniform test grid used for relative errors.
pub const TEST_GRID_POINTS: usize = 512;

pub fn test_grid(a: f64, b: f64) -> Result<UniformGrid> {
    UniformGrid::new(a, b, TEST_GRID_POINTS)
}

/// `‖approx − exact‖_w / ‖exact‖_w` with trapezoid weights of `grid`.
pub fn relative_l2(grid: &UniformGrid, exact: &[f64], approx: &[f64]) -> Result<f64> {
    check_len("relative error (exact)", grid.len(), exact.len())?;
    check_len("relative error (approx)", grid.len(), approx.len())?;
    let diff: Vec<f64> = approx.iter().zip(exact).map(|(a, e)| a - e).collect();
    Ok(grid.l2_norm(&diff) / grid.l2_norm(exact))
}

/// Plain discrete relative error over a set of samples, no weights.
pub fn relative_l2_discrete(exact: &[f64], approx: &[f64]) -> Result<f64> {
    check_len("relative error", exact.len(), approx.len())?;
    let num: f64 = approx.iter().zip(exact).map(|(a, e)| (a - e) * (a - e)).sum();
    let den: f64 = exact.iter().map(|e| e * e).sum();
    Ok((num / den).sqrt())
}
