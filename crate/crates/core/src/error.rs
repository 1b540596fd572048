use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("expected a positive value, got {0}")]
    NonPositive(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("axis {axis} outside 1..={dim}")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("degenerate interval [{lower}, {upper}]")]
    DegenerateInterval { lower: String, upper: String },

    #[error("box has {0} open sides; at most one is allowed")]
    TooManyOpenSides(usize),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("schedule fails its containment checks at axis {axis}, level {level}")]
    ScheduleRejected { axis: usize, level: u32 },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("functional {index} has dual norm {norm}, expected 1")]
    NotUnitFunctional { index: usize, norm: String },

    #[error("set is not {alpha}-norming; witness x = {witness:?}")]
    NotNorming { alpha: String, witness: Point },

    #[error("no admissible pair found after {pairs} pairs; (1/2)-norming fails at {certificate:?}")]
    SearchExhausted { pairs: usize, certificate: Point },

    #[error("pair system violates condition ({condition}): {detail}")]
    PairCondition { condition: u8, detail: String },

    #[error("witnesses exist only for slab tiles")]
    NotASlab,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
