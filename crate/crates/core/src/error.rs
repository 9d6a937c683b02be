use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("contour needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("no boundary: mask is empty or full-frame degenerate")]
    NoBoundary,

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("mask must contain both foreground and background pixels")]
    TrivialMask,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solve failed: {0}")]
    Solve(&'static str),

    #[error("evolution failed at iteration {iteration}: {source}")]
    Evolution {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parameter fit failed at epoch {epoch}: {source}")]
    Fit {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn mismatch(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            got_w: got.0,
            got_h: got.1,
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }
}
