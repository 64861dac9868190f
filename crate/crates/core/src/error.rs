use thiserror::Error;

/// Errors raised by the solver, the auditor and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field shape {got:?} does not match grid {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("modal exponent {exponent:.1} exceeds the cap of {cap}")]
    ExponentOverflow { exponent: f64, cap: f64 },

    #[error("singular {system} system (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem {
        system: &'static str,
        pivot_ratio: f64,
    },

    #[error("steepness guard tripped at t = {t}: max |grad eta| = {max_slope:.4}")]
    SteepnessExceeded { t: f64, max_slope: f64 },

    #[error("depth guard tripped at t = {t}: min eta = {min_eta:.4} with depth {depth}")]
    DepthExceeded { t: f64, min_eta: f64, depth: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad snapshot: {0}")]
    BadSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for the two runtime guards that abort time integration.
    pub fn is_guard_abort(&self) -> bool {
        matches!(
            self,
            Error::SteepnessExceeded { .. } | Error::DepthExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
