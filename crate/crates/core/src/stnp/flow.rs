use serde::{Deserialize, Serialize};

use super::run::StnpProblem;
use crate::ansatz::{Ansatz, BoundaryWrapper};
use crate::error::{check_len, Result};
use crate::models::Rhs;
use crate::projection::{defect_values, solve_projection, weighted_norm, ProjectionOutcome};
use crate::reference::TruncationProxy;
use crate::timestepping::{Flow, StepProbe};

/// Running tally of the per-solve projection contracts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractStats {
    pub solves: usize,
    pub failures: usize,
    /// Worst `|δ² − (‖d‖_w² + λ²‖γ‖²)| / δ²`, with `d` recomputed from `J`, `f`, `γ`.
    pub worst_delta_identity: f64,
    /// Worst `‖d‖_w − δ`.
    pub worst_defect_excess: f64,
    /// Worst `‖Jγ‖_w − contraction·‖f‖_w`.
    pub worst_contraction_excess: f64,
    pub max_contraction: f64,
}

impl ContractStats {
    fn record(&mut self, out: &ProjectionOutcome, defect_norm: f64) {
        self.solves += 1;
        let d2 = out.delta * out.delta;
        let rebuilt = defect_norm * defect_norm + out.lambda * out.lambda * out.gamma_norm * out.gamma_norm;
        let ident = if d2 > 0.0 { (d2 - rebuilt).abs() / d2 } else { rebuilt };
        let excess = defect_norm - out.delta;
        let contr = out.applied_norm - out.contraction * out.rhs_norm;
        self.worst_delta_identity = self.worst_delta_identity.max(ident);
        self.worst_defect_excess = self.worst_defect_excess.max(excess);
        self.worst_contraction_excess = self.worst_contraction_excess.max(contr);
        self.max_contraction = self.max_contraction.max(out.contraction);
        let contraction_ok = if out.lambda > 0.0 { out.contraction < 1.0 } else { out.contraction <= 1.0 };
        let ok = ident <= 1e-10
            && excess <= 1e-12 * out.delta.max(1e-300) + 1e-14
            && contraction_ok
            && contr <= 1e-10 + 1e-12 * out.rhs_norm;
        if !ok {
            self.failures += 1;
        }
    }
}

/// The projected dynamics of one problem as a [`Flow`].
pub struct StnpFlow {
    ansatz: Ansatz,
    rhs: Rhs,
    xs: Vec<f64>,
    weights: Vec<f64>,
    problem: StnpProblem,
    proxy: Option<TruncationProxy>,
    dirichlet: bool,
    /// Outcome of the most recent first-stage solve.
    last_first: Option<ProjectionOutcome>,
    stage_deltas: Vec<(f64, usize, f64)>,
    pub contracts: ContractStats,
}

impl StnpFlow {
    pub fn new(problem: &StnpProblem) -> Result<Self> {
        problem.validate()?;
        let proxy = if problem.diagnostics.trunc_proxy {
            Some(TruncationProxy::new(&problem.model, &problem.grid)?)
        } else {
            None
        };
        Ok(Self {
            ansatz: problem.ansatz.clone(),
            rhs: Rhs::new(problem.model.clone(), &problem.grid)?,
            xs: problem.grid.points(),
            weights: problem.projection.weights(&problem.grid),
            problem: problem.clone(),
            proxy,
            dirichlet: matches!(problem.ansatz.spec().bc, BoundaryWrapper::DirichletLift { .. }),
            last_first: None,
            stage_deltas: Vec::new(),
            contracts: ContractStats::default(),
        })
    }

    /// `f^h − ∂_tG` at the collocation points. At Dirichlet nodes the lift already
    /// carries the boundary data, so those entries are zero.
    pub fn target(&self, q: &[f64], t: f64) -> Result<Vec<f64>> {
        let s = self.ansatz.eval_many(q, &self.xs, t)?;
        let mut f = self.rhs.eval(&s.u, &s.ux, &s.uxx, t)?;
        if self.dirichlet {
            let g_t = self.ansatz.lift_rate(&self.xs, t);
            for (fi, g) in f.iter_mut().zip(&g_t) {
                *fi -= g;
            }
            let n = f.len();
            f[0] = 0.0;
            f[n - 1] = 0.0;
        }
        Ok(f)
    }

    /// One full evaluation of the projected vector field.
    pub fn project(&mut self, q: &[f64], t: f64) -> Result<ProjectionOutcome> {
        let f = self.target(q, t)?;
        let j = self.ansatz.param_jacobian(q, &self.xs, t)?;
        let out = solve_projection(&j, &f, &self.weights, &self.problem.projection)?;
        let d = defect_values(&j, &f, &out.gamma)?;
        self.contracts.record(&out, weighted_norm(&d, &self.weights));
        Ok(out)
    }

    /// `(‖û‖_w, max(‖û‖_∞, ‖û_x‖_∞))`.
    pub fn energy(&self, q: &[f64], t: f64) -> Result<(f64, f64)> {
        let s = self.ansatz.eval_many(q, &self.xs, t)?;
        let e = weighted_norm(&s.u, self.problem.grid.weights());
        let m = s
            .u
            .iter()
            .chain(&s.ux)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((e, m))
    }

    pub fn trunc_proxy(&self, q: &[f64], t: f64) -> Result<f64> {
        match &self.proxy {
            Some(p) => {
                let s = self.ansatz.eval_many(q, p.fine_points(), t)?;
                p.eval(&s, t)
            }
            None => Ok(0.0),
        }
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    /// `(t, stage, δ)` for every stage, when per-stage recording is on.
    pub fn stage_deltas(&self) -> &[(f64, usize, f64)] {
        &self.stage_deltas
    }
}

impl Flow for StnpFlow {
    fn rate(&mut self, q: &[f64], t: f64, stage: usize) -> Result<Vec<f64>> {
        check_len("parameter vector", self.ansatz.n_params(), q.len())?;
        let out = self.project(q, t)?;
        if self.problem.diagnostics.per_stage {
            self.stage_deltas.push((t, stage, out.delta));
        }
        let gamma = out.gamma.clone();
        if stage == 0 {
            self.last_first = Some(out);
        }
        Ok(gamma)
    }

    fn probe(&mut self, q_prev: &[f64], t_prev: f64, q_next: &[f64], t_next: f64) -> Result<StepProbe> {
        let first = match self.last_first.take() {
            Some(o) => o,
            None => self.project(q_prev, t_prev)?,
        };
        let (energy, w1inf) = self.energy(q_next, t_next)?;
        Ok(StepProbe {
            delta: first.delta,
            energy,
            sigma_min: first.sigma_min,
            sigma_max: first.sigma_max,
            contraction: first.contraction,
            trunc_proxy: self.trunc_proxy(q_prev, t_prev)?,
            ls_residual: first.ls_residual,
            w1inf,
        })
    }
}
