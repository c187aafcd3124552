//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates an invariant (odd dimensions,
    /// bit depth out of range, non-increasing transfer knots, ...).
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A plane is too small for the requested statistic.
    #[error("degenerate plane: {0}")]
    DegeneratePlane(String),

    /// Inputs that must share dimensions do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A PGM byte stream does not start with a valid 16-bit P5 header.
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    /// A pixel sample exceeds the range allowed by the declared bit depth.
    #[error("value {value} exceeds bit depth {bit_depth} (max {max})")]
    ValueExceedsBitDepth { value: u32, bit_depth: u32, max: u32 },

    /// A frame file has no accompanying sidecar metadata record.
    #[error("missing sidecar for frame: {0}")]
    MissingSidecar(String),

    /// Sidecar metadata failed to parse or carries invalid values.
    #[error("bad sidecar {path}: {reason}")]
    BadSidecar { path: String, reason: String },

    /// A curve CSV failed to parse.
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    /// Curve frequencies must be strictly increasing.
    #[error("non-monotonic frequency at row {row}: {current} after {previous}")]
    NonMonotonicFrequency {
        row: usize,
        previous: f64,
        current: f64,
    },

    /// Curves being compared were produced with different schedules.
    #[error("schedule mismatch: {0}")]
    ScheduleMismatch(String),

    /// Critical-range detection needs at least three curve points.
    #[error("too few points: {got} (need at least {need})")]
    TooFewPoints { got: usize, need: usize },

    /// An operation received an empty input collection.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Plot labels do not pair up with curves.
    #[error("label mismatch: {curves} curves but {labels} labels")]
    LabelMismatch { curves: usize, labels: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
