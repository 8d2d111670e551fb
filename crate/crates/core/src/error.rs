use thiserror::Error;

/// Errors raised by the THMC library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("state {state} at position {position} outside 1..={states}")]
    InvalidState {
        state: usize,
        position: usize,
        states: usize,
    },

    #[error("shape mismatch: expected S={expected_states}, T={expected_length}, got S={states}, T={length}")]
    ShapeMismatch {
        expected_states: usize,
        expected_length: usize,
        states: usize,
        length: usize,
    },

    #[error("time index {t} outside {lo}..={hi}")]
    TimeOutOfRange { t: usize, lo: usize, hi: usize },

    /// Applying a move would drive a cell count below zero.
    #[error("move drives cell {path} negative")]
    Negativity { path: String },

    #[error("{what} exceeds cap: {requested} > {limit}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("no Markov basis available for S={states}, T={length}; supply an external move file (e.g. a 4ti2 .mar file) with --moves")]
    UnsupportedShape { states: usize, length: usize },

    #[error("paths do not cross at time {t}")]
    NotCrossing { t: usize },

    #[error("invalid move template: {0}")]
    InvalidTemplate(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
