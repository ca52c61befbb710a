use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Variants are grouped by the stage that raises them; [`Error::is_config`]
/// tells callers (the CLI in particular) whether the failure came from bad
/// input or from a numerical step.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("tensor is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("linear solve failed (relative residual {residual:e}): {reason}")]
    LinearSolve { residual: f64, reason: String },

    #[error("ill-conditioned ND matrix (condition number {0:e})")]
    IllConditioned(f64),

    #[error("Beltrami iteration did not converge after {iterations} steps (last increment {last_increment:e})")]
    NotConverged {
        iterations: usize,
        last_increment: f64,
    },

    #[error("orientation violated at ({x}, {y}): det of the map Jacobian is {det:e}")]
    Orientation { x: f64, y: f64, det: f64 },

    #[error("point ({x}, {y}) lies outside the map window")]
    OutsideWindow { x: f64, y: f64 },

    #[error("map inversion diverged for target ({x}, {y}) (residual {residual:e})")]
    InversionFailed { x: f64, y: f64, residual: f64 },

    #[error("NaN or infinite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("provenance mismatch: expected {expected}, found {found}")]
    Provenance { expected: String, found: String },

    #[error("inverse transform has imaginary residual {0:.3e} relative to the field scale")]
    ImaginaryResidual(f64),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error stems from user input rather than a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::NotSpd(_)
                | Error::Mesh(_)
                | Error::Provenance { .. }
                | Error::Format(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Dimension(_)
        )
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NotSpd(_) => "not_spd",
            Error::Mesh(_) => "mesh",
            Error::InvalidMesh(_) => "invalid_mesh",
            Error::DegenerateTriangle { .. } => "degenerate_triangle",
            Error::LinearSolve { .. } => "linear_solve",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::NotConverged { .. } => "not_converged",
            Error::Orientation { .. } => "orientation",
            Error::OutsideWindow { .. } => "outside_window",
            Error::InversionFailed { .. } => "inversion_failed",
            Error::NonFinite(_) => "non_finite",
            Error::Dimension(_) => "dimension",
            Error::Provenance { .. } => "provenance",
            Error::ImaginaryResidual(_) => "imaginary_residual",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
