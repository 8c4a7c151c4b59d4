//! Right-hand sides of the two fractional Burgers models on a collocation grid.
//!
//! FBEFL: `u_t = −ε(−Δ)^{α/2}u − u·u_x + f(x, t)`.
//! FBENN: `u_t = ε·u_xx − ½·D^β[(D^{1−β}u)²]` with Caputo derivatives from the left end.

mod forcing;

use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::fracops::{FracOpPlan, GlOrder, UniformGrid};

pub use forcing::{manufactured_exact, manufactured_forcing};

pub type ForcingFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct FbeflConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub gl_order: GlOrder,
    pub forcing: Option<ForcingFn>,
}

impl fmt::Debug for FbeflConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbeflConfig")
            .field("alpha", &self.alpha)
            .field("epsilon", &self.epsilon)
            .field("gl_order", &self.gl_order)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl FbeflConfig {
    pub fn new(alpha: f64, epsilon: f64, gl_order: GlOrder) -> Self {
        Self {
            alpha,
            epsilon,
            gl_order,
            forcing: None,
        }
    }

    /// With the forcing that makes `e^{−t}x³(1−x)³` an exact solution on `[0, 1]`.
    pub fn manufactured(alpha: f64, epsilon: f64, gl_order: GlOrder) -> Self {
        let forcing: ForcingFn = Arc::new(move |x, t| manufactured_forcing(x, t, alpha, epsilon));
        Self {
            forcing: Some(forcing),
            ..Self::new(alpha, epsilon, gl_order)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(Error::Domain(format!("FBEFL order must lie in (1, 2], got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbennConfig {
    pub beta: f64,
    pub epsilon: f64,
}

impl FbennConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Domain(format!("FBENN order must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Fbefl(FbeflConfig),
    Fbenn(FbennConfig),
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Fbefl(c) => c.validate(),
            Model::Fbenn(c) => c.validate(),
        }
    }

    /// Whether the right-hand side uses `u_xx`.
    pub fn needs_uxx(&self) -> bool {
        matches!(self, Model::Fbenn(_))
    }
}

/// A model bound to one grid, with its operator plans built once.
#[derive(Debug, Clone)]
pub struct Rhs {
    model: Model,
    grid: UniformGrid,
    points: Vec<f64>,
    kernel: Kernel,
}

#[derive(Debug, Clone)]
enum Kernel {
    Laplacian(FracOpPlan),
    /// Inner `D^{1−β}` and outer `D^β` for β in (0, 1).
    Caputo(FracOpPlan, FracOpPlan),
    /// β = 1: `u·u_x`.
    Classical,
    /// β = 0: `½·u_x²`.
    HamiltonJacobi,
}

impl Rhs {
    pub fn new(model: Model, grid: &UniformGrid) -> Result<Self> {
        model.validate()?;
        let kernel = match &model {
            Model::Fbefl(c) => Kernel::Laplacian(FracOpPlan::frac_laplacian(c.alpha, grid, c.gl_order)?),
            Model::Fbenn(c) if c.beta == 1.0 => Kernel::Classical,
            Model::Fbenn(c) if c.beta == 0.0 => Kernel::HamiltonJacobi,
            Model::Fbenn(c) => Kernel::Caputo(
                FracOpPlan::caputo_l1(1.0 - c.beta, grid)?,
                FracOpPlan::caputo_l1(c.beta, grid)?,
            ),
        };
        Ok(Self {
            model,
            grid: grid.clone(),
            points: grid.points(),
            kernel,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    /// `f^h` at every grid node from values and x-derivatives of `û` there.
    /// `uxx` may be empty for FBEFL.
    pub fn eval(&self, u: &[f64], ux: &[f64], uxx: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.grid.len();
        check_len("rhs u", n, u.len())?;
        check_len("rhs u_x", n, ux.len())?;
        let out = match (&self.model, &self.kernel) {
            (Model::Fbefl(c), Kernel::Laplacian(plan)) => {
                let lap = plan.apply(u)?;
                let mut f: Vec<f64> = (0..n).map(|i| -c.epsilon * lap[i] - u[i] * ux[i]).collect();
                if let Some(g) = &c.forcing {
                    for (fi, &x) in f.iter_mut().zip(&self.points) {
                        *fi += g(x, t);
                    }
                }
                f
            }
            (Model::Fbenn(c), kernel) => {
                check_len("rhs u_xx", n, uxx.len())?;
                let flux: Vec<f64> = match kernel {
                    Kernel::Classical => (0..n).map(|i| u[i] * ux[i]).collect(),
                    Kernel::HamiltonJacobi => ux.iter().map(|v| 0.5 * v * v).collect(),
                    Kernel::Caputo(inner, outer) => {
                        let sq: Vec<f64> = inner.apply(u)?.iter().map(|v| v * v).collect();
                        outer.apply(&sq)?.iter().map(|v| 0.5 * v).collect()
                    }
                    Kernel::Laplacian(_) => unreachable!(),
                };
                (0..n).map(|i| c.epsilon * uxx[i] - flux[i]).collect()
            }
            (Model::Fbefl(_), _) => unreachable!(),
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite right-hand side".into()));
        }
        Ok(out)
    }
}

/// FBEFL right-hand side at the grid nodes.
pub fn fbefl_rhs(u: &[f64], ux: &[f64], t: f64, cfg: &FbeflConfig, grid: &UniformGrid) -> Result<Vec<f64>> {
    Rhs::new(Model::Fbefl(cfg.clone()), grid)?.eval(u, ux, &[], t)
}

/// FBENN right-hand side at the grid nodes.
pub fn fbenn_rhs(
    u: &[f64],
    uxx: &[f64],
    ux: &[f64],
    t: f64,
    cfg: &FbennConfig,
    grid: &UniformGrid,
) -> Result<Vec<f64>> {
    Rhs::new(Model::Fbenn(*cfg), grid)?.eval(u, ux, uxx, t)
}
