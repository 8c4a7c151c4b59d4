//! Tanh network ansatz `û(x, t) = Φ(x; q(t))` with hard boundary treatment.
//!
//! Values and the first two x-derivatives are propagated forward through the
//! layers; parameter gradients come from a reverse sweep per point.

mod fit;
mod init;
mod io;
mod network;
mod spec;

pub use fit::{fit_from, fit_initial, FitOutcome, OptimizerConfig};
pub use init::init_xavier;
pub use io::{read_checkpoint, write_checkpoint, CheckpointHeader, LAYOUT_VERSION};
pub use network::{Ansatz, LayerParams, ParamVector, Samples};
pub use spec::{
    AnsatzSpec, BoundaryData, BoundaryTable, BoundaryWrapper, FeatureMap, FnBoundary, LayerLayout,
    ZeroBoundary,
};
