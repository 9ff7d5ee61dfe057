use std::io;

use thiserror::Error;

use crate::geometry::{Coord, GridPoint, LabelId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate label id {0}")]
    DuplicateId(LabelId),
    #[error("unknown label id {0}")]
    UnknownId(LabelId),
    #[error("label {id} has grid point ({}, {}) outside the frame", .point.row, .point.col)]
    OutOfFrame { id: LabelId, point: GridPoint },
    #[error("label {id} is not a unit square (width {width})")]
    NotASquare { id: LabelId, width: Coord },
    #[error("label {id} has non-positive width {width}")]
    InvalidWidth { id: LabelId, width: Coord },
    #[error("coordinate {0} exceeds the supported magnitude")]
    CoordOutOfRange(Coord),
    #[error("scale exponent {0} is out of range (0..=9)")]
    InvalidScale(u32),
    #[error("shifting parameter k must be at least 1")]
    InvalidShift,
    #[error("instance has {n} labels, exact oracle cap is {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("exact search exhausted its budget of {0} nodes")]
    BudgetExhausted(u64),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgo(String),
    #[error("algorithm {algo} does not support {mode} instances")]
    UnsupportedMode { algo: String, mode: &'static str },
    #[error("infeasible trace: {0}")]
    InfeasibleTrace(String),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
