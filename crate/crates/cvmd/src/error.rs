use thiserror::Error;

/// Errors surfaced by the simulation and measurement layers.
#[derive(Debug, Error)]
pub enum CvmdError {
    #[error("config error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degenerate pair segment (coincident endpoints)")]
    DegenerateSegment,

    #[error("molecular overlap: pair ({i}, {j}) at zero separation")]
    Overlap { i: usize, j: usize },

    #[error("box length {len} smaller than 2 r_c = {min} on periodic axis {axis}")]
    BoxTooSmall { axis: usize, len: f64, min: f64 },

    #[error("incompatible molecule count {n}: not 4 k^3 for an FCC-filled cubic box")]
    BadFccCount { n: usize },

    #[error("series too short for block averaging: {len} samples, block {block}")]
    ShortSeries { len: usize, block: usize },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("invariant check failed: {0}")]
    InvariantFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CvmdError>;
