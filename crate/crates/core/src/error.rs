use thiserror::Error;

/// Errors raised by the kernel, the module model and the workspace loader.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("{routine} did not converge within {sweeps} sweeps")]
    NoConvergence { routine: &'static str, sweeps: usize },

    #[error("operator is not positive (eigenvalue {eigenvalue:e} at {point})")]
    NotPositive { point: String, eigenvalue: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("elements live over different spectra")]
    SpectrumMismatch,

    #[error("module mismatch: {0}")]
    ModuleMismatch(String),

    #[error("unknown spectrum point `{0}`")]
    UnknownPoint(String),

    #[error("projection at {point} is not an orthogonal projection (deviation {deviation:e})")]
    InvalidProjection { point: String, deviation: f64 },

    #[error("field value at {point} leaves the module (deviation {deviation:e})")]
    OutsideModule { point: String, deviation: f64 },

    #[error("module is not free")]
    NotFree,

    #[error("not a frame of multipliers (deviation {deviation:e})")]
    NotAFrame { deviation: f64 },

    #[error("operator is not an isometry (deviation {deviation:e})")]
    NotIsometry { deviation: f64 },

    #[error("operator is not trace class: {0}")]
    NotTraceClass(String),

    #[error("workspace: {0}")]
    Workspace(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
