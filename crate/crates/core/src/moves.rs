//! Integer moves `z` with `A·z = 0`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::path::{Shape, StatePath};

/// A sparse signed integer table over `S^T` cells.
///
/// Construction does not check `A·z = 0`; use
/// [`is_valid_move`](crate::config::is_valid_move) for that.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    shape: Shape,
    delta: BTreeMap<u64, i64>,
}

impl Move {
    pub fn zero(shape: Shape) -> Self {
        Move {
            shape,
            delta: BTreeMap::new(),
        }
    }

    /// Sums `(index, value)` pairs; zero entries are dropped.
    pub fn from_entries(shape: Shape, entries: impl IntoIterator<Item = (u64, i64)>) -> Result<Self> {
        let mut mv = Move::zero(shape);
        for (index, value) in entries {
            if index >= shape.cells() {
                return Err(Error::InvalidShape(format!(
                    "move index {index} outside 0..{}",
                    shape.cells()
                )));
            }
            mv.bump(index, value);
        }
        Ok(mv)
    }

    /// `+Σ plus − Σ minus` as multisets of path indices.
    pub fn from_parts(shape: Shape, plus: &[u64], minus: &[u64]) -> Result<Self> {
        Self::from_entries(
            shape,
            plus.iter().map(|&i| (i, 1)).chain(minus.iter().map(|&i| (i, -1))),
        )
    }

    pub fn from_paths(shape: Shape, plus: &[StatePath], minus: &[StatePath]) -> Result<Self> {
        for p in plus.iter().chain(minus) {
            shape.check_same(&p.shape())?;
        }
        let plus: Vec<u64> = plus.iter().map(StatePath::index).collect();
        let minus: Vec<u64> = minus.iter().map(StatePath::index).collect();
        Self::from_parts(shape, &plus, &minus)
    }

    /// Test helper: `&[("1121", 1), ("1211", -1)]`.
    pub fn from_digit_entries(shape: Shape, entries: &[(&str, i64)]) -> Result<Self> {
        let entries = entries
            .iter()
            .map(|(d, v)| Ok((StatePath::parse_digits(shape, d)?.index(), *v)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(shape, entries)
    }

    fn bump(&mut self, index: u64, value: i64) {
        if value == 0 {
            return;
        }
        let slot = self.delta.entry(index).or_insert(0);
        *slot += value;
        if *slot == 0 {
            self.delta.remove(&index);
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        self.delta.is_empty()
    }

    /// Nonzero `(index, value)` entries in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.delta.iter().map(|(&k, &v)| (k, v))
    }

    pub fn get(&self, index: u64) -> i64 {
        self.delta.get(&index).copied().unwrap_or(0)
    }

    /// Number of nonzero cells.
    pub fn support_size(&self) -> usize {
        self.delta.len()
    }

    /// Degree in paths: the total positive mass `Σ_ω max(z(ω), 0)`.
    pub fn degree(&self) -> u64 {
        self.delta.values().filter(|v| **v > 0).map(|v| *v as u64).sum()
    }

    pub fn negated(&self) -> Move {
        Move {
            shape: self.shape,
            delta: self.delta.iter().map(|(&k, &v)| (k, -v)).collect(),
        }
    }

    /// Sign-normalised copy whose lowest-index entry is positive.
    pub fn canonical(&self) -> Move {
        match self.delta.values().next() {
            Some(v) if *v < 0 => self.negated(),
            _ => self.clone(),
        }
    }

    /// Path indices with positive entries, repeated by multiplicity.
    pub fn positive_part(&self) -> Vec<u64> {
        self.part(1)
    }

    /// Path indices with negative entries, repeated by multiplicity.
    pub fn negative_part(&self) -> Vec<u64> {
        self.part(-1)
    }

    fn part(&self, sign: i64) -> Vec<u64> {
        let mut out = Vec::new();
        for (&index, &v) in &self.delta {
            if v * sign > 0 {
                out.extend(std::iter::repeat_n(index, v.unsigned_abs() as usize));
            }
        }
        out
    }

    /// Per-slice edge deltas `z^t_ij` flattened `[t][i][j]`, 0-based `t < T−1`.
    pub fn edge_deltas(&self) -> Vec<i64> {
        let s = self.shape.states();
        let len = self.shape.length();
        let mut out = vec![0i64; (len - 1) * s * s];
        let mut buf = vec![0u8; len];
        for (index, v) in self.iter() {
            self.shape.decode_into(index, &mut buf);
            for (t, w) in buf.windows(2).enumerate() {
                out[self.shape.edge_slot(t, w[0] as usize - 1, w[1] as usize - 1)] += v;
            }
        }
        out
    }

    /// Node deltas `z^t_i` flattened `[t][i]`, 0-based `t < T`.
    pub fn node_deltas(&self) -> Vec<i64> {
        let s = self.shape.states();
        let len = self.shape.length();
        let mut out = vec![0i64; len * s];
        let mut buf = vec![0u8; len];
        for (index, v) in self.iter() {
            self.shape.decode_into(index, &mut buf);
            for (t, &state) in buf.iter().enumerate() {
                out[t * s + state as usize - 1] += v;
            }
        }
        out
    }

    /// `Σ_{t,i,j} |z^t_ij|`.
    pub fn edge_l1(&self) -> u64 {
        self.edge_deltas().iter().map(|v| v.unsigned_abs()).sum()
    }

    /// One row of a move file: `S^T` integers in lexicographic order.
    pub fn dense_row(&self) -> Vec<i64> {
        let mut row = vec![0i64; self.shape.cells() as usize];
        for (index, v) in self.iter() {
            row[index as usize] = v;
        }
        row
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |f: &mut fmt::Formatter<'_>, sign: i64, prefix: &str| -> fmt::Result {
            let labels: Vec<String> = self
                .iter()
                .filter(|(_, v)| v * sign > 0)
                .map(|(i, v)| {
                    let label = self.shape.label(i);
                    if v.abs() == 1 {
                        label
                    } else {
                        format!("{}×{label}", v.abs())
                    }
                })
                .collect();
            write!(f, "{prefix}{{{}}}", labels.join(","))
        };
        show(f, 1, "+")?;
        f.write_str(" ")?;
        show(f, -1, "-")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_cancel_and_canonicalise() {
        let shape = Shape::new(2, 3).unwrap();
        let mv = Move::from_digit_entries(shape, &[("111", 1), ("111", -1), ("122", -1), ("211", 1)]).unwrap();
        assert_eq!(mv.support_size(), 2);
        assert_eq!(mv.get(0), 0);
        let c = mv.canonical();
        assert!(c.iter().next().unwrap().1 > 0);
        assert_eq!(c, mv.negated());
        assert_eq!(mv.to_string(), "+{211} -{122}");
        assert_eq!(mv.degree(), 1);
    }

    #[test]
    fn dense_row_layout() {
        let shape = Shape::new(2, 3).unwrap();
        let mv = Move::from_digit_entries(shape, &[("112", 1), ("221", 1), ("122", -1), ("211", -1)]).unwrap();
        assert_eq!(mv.dense_row(), vec![0, 1, 0, -1, -1, 0, 1, 0]);
        assert_eq!(mv.positive_part(), vec![1, 6]);
        assert_eq!(mv.negative_part(), vec![3, 4]);
    }
}
