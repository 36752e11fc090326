use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("center has no finite image")]
    CenterHasNoImage,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("curve leaves domain")]
    CurveLeavesDomain,
    #[error("points in different components")]
    DifferentComponents,
    #[error("level escapes safe region")]
    LevelEscapesSafeRegion,
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}, energy {energy:.6e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        energy: f64,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error: 3 for numerical failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } => 3,
            _ => 2,
        }
    }
}
