use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two sequences that must agree in length do not.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Non-finite values or a broken numerical invariant.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The initial-condition fit produced a non-finite loss.
    #[error("fit diverged at iteration {iteration}")]
    FitDiverged {
        iteration: usize,
        last_finite: Vec<f64>,
    },

    /// The adaptive stepper could not satisfy its tolerance above `dt_min`.
    #[error("step failure at t = {t}: dt = {dt} below dt_min (scaled error {error})")]
    StepFailure { t: f64, dt: f64, error: f64 },

    /// Inconsistent problem or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An error raised while evaluating the projected dynamics, annotated with where it happened.
    #[error("at t = {t}, stage {stage}: {source}")]
    AtStage {
        t: f64,
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape {
            context,
            expected,
            got,
        }
    }

    /// Strip stage annotations and return the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::shape(context, expected, got))
    }
}

pub(crate) fn check_finite(context: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::Numerical(format!(
            "{context}: non-finite value at index {i}"
        ))),
    }
}
