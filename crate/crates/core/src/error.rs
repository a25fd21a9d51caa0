use thiserror::Error;

use crate::polyform::Phase;

/// Errors raised by graph construction, evaluation, solving and certification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arc {arc}: expected |tail|={r} and |head|={s}, got {tail} and {head}")]
    ArityMismatch {
        arc: usize,
        r: usize,
        s: usize,
        tail: usize,
        head: usize,
    },

    #[error("arities must be positive, got r={r}, s={s}")]
    InvalidArity { r: usize, s: usize },

    #[error("arc {arc}: vertex {vertex:?} appears in both tail and head")]
    Overlap { arc: usize, vertex: String },

    #[error("graph has no arcs")]
    EmptyGraph,

    #[error("vector length mismatch: expected {expected}, got {got}")]
    IndexMismatch { expected: usize, got: usize },

    #[error("exponents must satisfy p >= 1 and q >= 1, got p={p}, q={q}")]
    Domain { p: f64, q: f64 },

    #[error("fixed-point step needs p > 1 and q > 1, got p={p}, q={q}")]
    DegenerateExponent { p: f64, q: f64 },

    #[error("operation requires {expected} phase, got {got}")]
    Phase { expected: &'static str, got: Phase },

    #[error("empty list of component values")]
    EmptyList,

    #[error("labeling mode {label} does not match the {params} phase of (p,q)")]
    ModeMismatch { label: Phase, params: Phase },

    #[error("{0} labeling requires arc weights")]
    MissingWeights(Phase),

    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),

    #[error("coordinate {index} of the {side} vector is zero")]
    ZeroCoordinate { side: &'static str, index: usize },

    #[error("labeling is not consistent")]
    NotConsistent,

    #[error("labeling is not normal")]
    NotNormal,

    #[error("graph is not anadiplosis connected")]
    Disconnected,

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
