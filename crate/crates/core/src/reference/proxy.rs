use crate::ansatz::Samples;
use crate::error::{check_len, Result};
use crate::fracops::UniformGrid;
use crate::models::{Model, Rhs};

/// Richardson estimate of the truncation error of `f^h`:
/// `R̂ = ‖f^{h/2}|_coarse − f^h‖_w`, boundary nodes excluded.
#[derive(Debug, Clone)]
pub struct TruncationProxy {
    coarse: Rhs,
    fine: Rhs,
    fine_points: Vec<f64>,
}

impl TruncationProxy {
    pub fn new(model: &Model, grid: &UniformGrid) -> Result<Self> {
        let refined = grid.refined();
        Ok(Self {
            coarse: Rhs::new(model.clone(), grid)?,
            fine_points: refined.points(),
            fine: Rhs::new(model.clone(), &refined)?,
        })
    }

    /// Nodes of the refined grid where `û` must be sampled.
    pub fn fine_points(&self) -> &[f64] {
        &self.fine_points
    }

    pub fn eval(&self, fine: &Samples, t: f64) -> Result<f64> {
        let nf = self.fine_points.len();
        check_len("proxy samples", nf, fine.len())?;
        let every_other = |v: &[f64]| -> Vec<f64> { v.iter().step_by(2).copied().collect() };
        let uxx_f = if fine.uxx.is_empty() { vec![0.0; nf] } else { fine.uxx.clone() };
        let ff = self.fine.eval(&fine.u, &fine.ux, &uxx_f, t)?;
        let fc = self
            .coarse
            .eval(&every_other(&fine.u), &every_other(&fine.ux), &every_other(&uxx_f), t)?;
        let w = self.coarse.grid().weights();
        let nc = fc.len();
        let s: f64 = (1..nc - 1)
            .map(|i| {
                let d = ff[2 * i] - fc[i];
                w[i] * d * d
            })
            .sum();
        Ok(s.sqrt())
    }
}

/// One-shot proxy; `sample` returns `û` and its derivatives at the given points.
pub fn truncation_proxy<S>(sample: S, model: &Model, grid: &UniformGrid, t: f64) -> Result<f64>
where
    S: FnOnce(&[f64]) -> Result<Samples>,
{
    let p = TruncationProxy::new(model, grid)?;
    let s = sample(p.fine_points())?;
    p.eval(&s, t)
}
