//! JSON run configuration. Every section and every field is optional; missing
//! values take the defaults below, unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use stnp_core::ansatz::OptimizerConfig;
use stnp_core::fracops::GlOrder;
use stnp_core::projection::ProjectionConfig;
use stnp_core::stnp::DiagnosticsConfig;
use stnp_core::timestepping::{Scheme, StepperConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub ansatz: AnsatzSection,
    pub grid: GridSection,
    pub projection: ProjectionConfig,
    pub stepper: StepperConfig,
    pub fit: FitSection,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputSection,
    pub convergence: ConvergenceSection,
    pub compare: CompareSection,
    pub fbenn: FbennSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            ansatz: AnsatzSection::default(),
            grid: GridSection::default(),
            projection: ProjectionConfig::default(),
            stepper: StepperConfig::ssp_rk3(1e-3, 1.0),
            fit: FitSection::default(),
            diagnostics: DiagnosticsConfig::default(),
            output: OutputSection::default(),
            convergence: ConvergenceSection::default(),
            compare: CompareSection::default(),
            fbenn: FbennSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// Fractional Laplacian diffusion.
    Fbefl,
    /// Nonlocal fractional convection with classical diffusion.
    Fbenn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// `−sin(πx)`.
    NegSinPi,
    /// `x³(1−x)³`, the manufactured solution at `t = 0`.
    Manufactured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub equation: Equation,
    /// Order of the fractional Laplacian (FBEFL).
    pub alpha: f64,
    /// Order of the nonlocal convection (FBENN).
    pub beta: f64,
    pub epsilon: f64,
    pub gl_order: GlOrder,
    /// Add the manufactured-solution forcing (FBEFL only).
    pub forcing: bool,
    pub initial: Initial,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            equation: Equation::Fbefl,
            alpha: 1.6,
            beta: 0.8,
            epsilon: 0.01,
            gl_order: GlOrder::Second,
            forcing: false,
            initial: Initial::NegSinPi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bc {
    /// Boundary values built in through a lift.
    Dirichlet,
    /// Plain network, boundary values left free.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    /// Hidden layer widths; input and output layers have width 1.
    pub hidden: Vec<usize>,
    pub seed: u64,
    pub bc: Bc,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self {
            hidden: vec![10, 10],
            seed: 1,
            bc: Bc::Dirichlet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub a: f64,
    pub b: f64,
    /// Number of collocation points, endpoints included.
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { a: -1.0, b: 1.0, n: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Uniform sample points for the initial fit.
    pub points: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            points: 1200,
            optimizer: OptimizerConfig {
                adam_iters: 2000,
                lm_iters: 1500,
                ..OptimizerConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    /// Times at which solution snapshots are written.
    pub snapshots: Vec<f64>,
    /// Points of the uniform grid snapshots are sampled on.
    pub snapshot_points: usize,
    /// Write every k-th accepted step to the diagnostics CSV.
    pub cadence: usize,
    /// Write a parameter checkpoint every k accepted steps (0: final state only).
    pub checkpoint_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            snapshots: vec![0.5, 1.0],
            snapshot_points: 512,
            cadence: 1,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    pub ns: Vec<usize>,
    pub orders: Vec<GlOrder>,
    /// Network depths counted in weight layers: depth 3 is `[1, w, w, 1]`.
    pub depths: Vec<usize>,
    pub width: usize,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            ns: vec![5, 10, 20, 40, 50, 100, 200, 400, 800, 1000],
            orders: vec![GlOrder::First, GlOrder::Second],
            depths: vec![3, 5, 7],
            width: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub central_nodes: usize,
    pub upwind_nodes: usize,
    /// Time step of both grid solvers (the upwind one may reduce it further).
    pub dt: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            central_nodes: 201,
            upwind_nodes: 1601,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub fine_n: usize,
    pub quad_n: usize,
    /// Spacing of the tabulated boundary data fed to the lift.
    pub boundary_dt: f64,
    /// Cache directory, relative to the output directory unless absolute.
    pub cache_dir: String,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            fine_n: 2001,
            quad_n: 2001,
            boundary_dt: 5e-3,
            cache_dir: "oracle-cache".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FbennSection {
    pub oracle: OracleSection,
    /// Times of the error-vs-time series.
    pub error_times: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Seeds of the ensemble; empty runs the single `ansatz.seed`.
    pub ensemble_seeds: Vec<u64>,
    /// Compare the oracle against the classical Cole-Hopf formula (needs β = 1).
    pub sanity: bool,
}

impl Default for FbennSection {
    fn default() -> Self {
        Self {
            oracle: OracleSection::default(),
            error_times: (1..=10).map(|k| k as f64 / 10.0).collect(),
            schemes: vec![Scheme::SspRk3, Scheme::Rk45],
            ensemble_seeds: Vec::new(),
            sanity: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// SHA-256 of the canonical JSON form, so equal configs hash equally however written.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canon);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check(&self) -> Result<(), CliError> {
        let m = &self.model;
        if !(m.epsilon > 0.0) {
            return Err(CliError::Config("model.epsilon must be positive".into()));
        }
        if m.forcing && m.equation != Equation::Fbefl {
            return Err(CliError::Config("model.forcing applies to fbefl only".into()));
        }
        if self.ansatz.hidden.is_empty() || self.ansatz.hidden.contains(&0) {
            return Err(CliError::Config("ansatz.hidden needs at least one nonzero width".into()));
        }
        if !(self.grid.b > self.grid.a) || self.grid.n < 3 {
            return Err(CliError::Config("grid needs a < b and n >= 3".into()));
        }
        if self.output.cadence == 0 || self.output.snapshot_points < 2 {
            return Err(CliError::Config("output.cadence must be >= 1 and snapshot_points >= 2".into()));
        }
        if self.output.snapshots.iter().any(|&t| !(t >= 0.0) || t > self.stepper.t_end) {
            return Err(CliError::Config("output.snapshots must lie in [0, stepper.t_end]".into()));
        }
        self.projection.validate()?;
        self.stepper.validate()?;
        Ok(())
    }
}
