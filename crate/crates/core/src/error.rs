use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("intervals overlap: [{0}, {1}] and [{2}, {3}]")]
    OverlappingIntervals(f64, f64, f64, f64),

    #[error("pruning-set mass must lie in (0, 1], got {0}")]
    InvalidMass(f64),

    #[error("declared pruning mass {declared} disagrees with analytic mass {analytic}")]
    MassMismatch { declared: f64, analytic: f64 },

    #[error("sample {x} has zero density under the sampling distribution")]
    ImpossibleSample { x: f64 },

    #[error("sample {x} has f(x)h(x) != 0 but lies outside the pruning set")]
    SupportViolation { x: f64 },

    #[error("control variate requires the pruning set to cover the target support; sample {x} has f(x) != 0 outside it")]
    ControlVariateOutsidePruning { x: f64 },

    #[error("batch is empty")]
    EmptyBatch,

    #[error("batch has {values} values but {outcomes} outcomes")]
    OutcomeLengthMismatch { values: usize, outcomes: usize },

    #[error("the exact-count regime requires kappa")]
    MissingKappa,

    #[error("kappa is only meaningful in the exact-count regime")]
    UnexpectedKappa,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("nothing to emit")]
    NoRows,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
