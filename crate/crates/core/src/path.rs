//! State-space dimensions and single chain trajectories.

use std::fmt;

use crate::error::{Error, Result};

/// Largest number of states a path may use. States are stored as `u8`.
pub const MAX_STATES: usize = 255;

/// Dimensions `(S, T)` of a path space: `S` states, paths of length `T`.
///
/// Paths are indexed lexicographically with state 1 < 2 < … < S, so the
/// index of `(s_1, …, s_T)` is `Σ_t (s_t − 1)·S^(T−t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    states: usize,
    length: usize,
    cells: u64,
}

impl Shape {
    /// Requires `2 ≤ S ≤ 255`, `T ≥ 3` and `S^T < 2^63`.
    pub fn new(states: usize, length: usize) -> Result<Self> {
        if !(2..=MAX_STATES).contains(&states) {
            return Err(Error::InvalidShape(format!(
                "S must lie in 2..={MAX_STATES}, got {states}"
            )));
        }
        if length < 3 {
            return Err(Error::InvalidShape(format!(
                "paths must have length T >= 3, got {length}"
            )));
        }
        let mut cells: u64 = 1;
        for _ in 0..length {
            cells = cells
                .checked_mul(states as u64)
                .filter(|c| *c < (1 << 63))
                .ok_or_else(|| {
                    Error::InvalidShape(format!("S^T overflows for S={states}, T={length}"))
                })?;
        }
        Ok(Shape {
            states,
            length,
            cells,
        })
    }

    #[inline]
    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of cells `S^T`.
    #[inline]
    pub fn cells(&self) -> u64 {
        self.cells
    }

    /// Lexicographic index of a 1-based state sequence. No validation.
    pub(crate) fn encode(&self, states: &[u8]) -> u64 {
        states
            .iter()
            .fold(0u64, |acc, &s| acc * self.states as u64 + (s as u64 - 1))
    }

    /// Writes the 1-based states of `index` into `out` (length `T`).
    pub(crate) fn decode_into(&self, mut index: u64, out: &mut [u8]) {
        debug_assert_eq!(out.len(), self.length);
        let s = self.states as u64;
        for slot in out.iter_mut().rev() {
            *slot = (index % s) as u8 + 1;
            index /= s;
        }
    }

    pub(crate) fn decode(&self, index: u64) -> Vec<u8> {
        let mut out = vec![0u8; self.length];
        self.decode_into(index, &mut out);
        out
    }

    pub(crate) fn check_same(&self, other: &Shape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected_states: self.states,
                expected_length: self.length,
                states: other.states,
                length: other.length,
            })
        }
    }

    /// Index of the edge `t:ij` (0-based `t`, `i`, `j`) in per-slice arrays.
    #[inline]
    pub(crate) fn edge_slot(&self, t: usize, i: usize, j: usize) -> usize {
        (t * self.states + i) * self.states + j
    }

    /// Iterator over all path indices in lexicographic order.
    pub fn all_indices(&self) -> std::ops::Range<u64> {
        0..self.cells
    }

    /// Formats a path index as its digit string, e.g. `1121`.
    pub fn label(&self, index: u64) -> String {
        format_states(&self.decode(index), "")
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S={}, T={}", self.states, self.length)
    }
}

pub(crate) fn format_states(states: &[u8], sep: &str) -> String {
    states
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// One observed trajectory `(s_1, …, s_T)` with states in `1..=S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatePath {
    shape: Shape,
    states: Vec<u8>,
}

impl StatePath {
    pub fn new(shape: Shape, states: &[usize]) -> Result<Self> {
        if states.len() != shape.length() {
            return Err(Error::InvalidShape(format!(
                "path has length {}, expected T={}",
                states.len(),
                shape.length()
            )));
        }
        let states = states
            .iter()
            .enumerate()
            .map(|(position, &s)| {
                if (1..=shape.states()).contains(&s) {
                    Ok(s as u8)
                } else {
                    Err(Error::InvalidState {
                        state: s,
                        position: position + 1,
                        states: shape.states(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StatePath { shape, states })
    }

    /// Parses a compact digit string such as `"1121"` (only for `S ≤ 9`).
    pub fn parse_digits(shape: Shape, digits: &str) -> Result<Self> {
        let states = digits
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::InvalidShape(format!("non-digit {c:?} in path")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, &states)
    }

    pub fn from_index(shape: Shape, index: u64) -> Result<Self> {
        if index >= shape.cells() {
            return Err(Error::InvalidShape(format!(
                "path index {index} outside 0..{}",
                shape.cells()
            )));
        }
        Ok(StatePath {
            shape,
            states: shape.decode(index),
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// 1-based states.
    pub fn states(&self) -> &[u8] {
        &self.states
    }

    /// State at 1-based time `t`.
    pub fn state_at(&self, t: usize) -> usize {
        self.states[t - 1] as usize
    }

    pub fn index(&self) -> u64 {
        self.shape.encode(&self.states)
    }
}

impl fmt::Display for StatePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.shape.states() > 9 { " " } else { "" };
        f.write_str(&format_states(&self.states, sep))
    }
}
