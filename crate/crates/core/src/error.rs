use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants split into two families: invalid input (a caller can fix it by
/// changing parameters) and numerical breakdown. [`Error::is_numerical`]
/// tells them apart, which the command-line front end maps onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Bogoliubov angle undefined at momentum {phi} for lambda = {lambda} (0/0)")]
    SingularAngle { lambda: f64, phi: f64 },

    #[error("basis dimension {dimension} exceeds the configured maximum {max}")]
    DimensionTooLarge { dimension: usize, max: usize },

    #[error("ground state is degenerate: gap {gap:e} below tolerance {tolerance:e}")]
    DegenerateGroundState { gap: f64, tolerance: f64 },

    #[error("spectral weights sum to {sum}, expected 1")]
    UnnormalizedWeights { sum: f64 },

    #[error("input state has norm {norm}, expected 1")]
    UnnormalizedInput { norm: f64 },

    #[error("division by zero: {0}")]
    DivideByZero(&'static str),

    #[error("found {found} envelope peaks, at least {needed} are required")]
    TooFewPeaks { found: usize, needed: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),
}

impl Error {
    /// `true` for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::ConvergenceFailure(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
