//! Sparse path tables and their sufficient statistics.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::moves::Move;
use crate::path::{Shape, StatePath};

/// A multiset of `N` paths stored as a sparse `S^T` contingency table.
///
/// Keys are lexicographic path indices; stored counts are strictly positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathTable {
    shape: Shape,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl PathTable {
    pub fn new(shape: Shape) -> Self {
        PathTable {
            shape,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn from_paths<'a>(shape: Shape, paths: impl IntoIterator<Item = &'a StatePath>) -> Result<Self> {
        let mut table = PathTable::new(shape);
        for path in paths {
            table.add(path, 1)?;
        }
        Ok(table)
    }

    /// Builds a table from `(index, count)` pairs; repeated indices accumulate.
    pub fn from_counts(shape: Shape, counts: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut table = PathTable::new(shape);
        for (index, count) in counts {
            table.add_index(index, count)?;
        }
        Ok(table)
    }

    /// Table holding one copy of each listed path index.
    pub fn from_indices(shape: Shape, indices: &[u64]) -> Result<Self> {
        Self::from_counts(shape, indices.iter().map(|&i| (i, 1)))
    }

    /// Convenience for tests and fixtures: `&[("1121", 2), ...]`, `S ≤ 9`.
    pub fn from_digit_counts(shape: Shape, entries: &[(&str, u64)]) -> Result<Self> {
        let mut table = PathTable::new(shape);
        for (digits, count) in entries {
            table.add(&StatePath::parse_digits(shape, digits)?, *count)?;
        }
        Ok(table)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Number of paths `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of distinct paths with positive count.
    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, path: &StatePath, count: u64) -> Result<()> {
        self.shape.check_same(&path.shape())?;
        self.add_index(path.index(), count)
    }

    pub fn add_index(&mut self, index: u64, count: u64) -> Result<()> {
        if index >= self.shape.cells() {
            return Err(Error::InvalidShape(format!(
                "path index {index} outside 0..{}",
                self.shape.cells()
            )));
        }
        if count == 0 {
            return Ok(());
        }
        self.total = self.total.checked_add(count).ok_or(Error::Overflow("table total"))?;
        let slot = self.counts.entry(index).or_insert(0);
        *slot = slot.checked_add(count).ok_or(Error::Overflow("cell count"))?;
        Ok(())
    }

    pub fn count(&self, path: &StatePath) -> u64 {
        self.count_index(path.index())
    }

    pub fn count_index(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    /// `(index, count)` pairs in lexicographic order, zero cells omitted.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Every path index repeated by its count, sorted.
    pub fn units(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.total as usize);
        for (index, count) in self.iter() {
            out.extend(std::iter::repeat_n(index, count as usize));
        }
        out
    }

    /// Initial-state counts and pooled transition counts.
    pub fn suff_stat(&self) -> SuffStat {
        let s = self.shape.states();
        let mut initial = vec![0u64; s];
        let mut transitions = vec![0u64; s * s];
        let mut buf = vec![0u8; self.shape.length()];
        for (index, count) in self.iter() {
            self.shape.decode_into(index, &mut buf);
            initial[buf[0] as usize - 1] += count;
            for w in buf.windows(2) {
                transitions[(w[0] as usize - 1) * s + (w[1] as usize - 1)] += count;
            }
        }
        SuffStat {
            states: s,
            initial,
            transitions,
        }
    }

    /// All per-slice transition counts `x^t_ij` flattened as `[t][i][j]`
    /// with 0-based `t` in `0..T−1`.
    pub fn edge_counts(&self) -> Vec<u64> {
        let s = self.shape.states();
        let t_len = self.shape.length();
        let mut out = vec![0u64; (t_len - 1) * s * s];
        let mut buf = vec![0u8; t_len];
        for (index, count) in self.iter() {
            self.shape.decode_into(index, &mut buf);
            for (t, w) in buf.windows(2).enumerate() {
                out[self.shape.edge_slot(t, w[0] as usize - 1, w[1] as usize - 1)] += count;
            }
        }
        out
    }

    /// `x^t_ij` for 1-based `t ∈ 1..=T−1`, as an `S×S` matrix.
    pub fn slice_transition_counts(&self, t: usize) -> Result<Vec<Vec<u64>>> {
        let hi = self.shape.length() - 1;
        if !(1..=hi).contains(&t) {
            return Err(Error::TimeOutOfRange { t, lo: 1, hi });
        }
        let s = self.shape.states();
        let mut out = vec![vec![0u64; s]; s];
        let mut buf = vec![0u8; self.shape.length()];
        for (index, count) in self.iter() {
            self.shape.decode_into(index, &mut buf);
            out[buf[t - 1] as usize - 1][buf[t] as usize - 1] += count;
        }
        Ok(out)
    }

    /// `x^t_i` for 1-based `t ∈ 1..=T`.
    pub fn node_counts(&self, t: usize) -> Result<Vec<u64>> {
        let hi = self.shape.length();
        if !(1..=hi).contains(&t) {
            return Err(Error::TimeOutOfRange { t, lo: 1, hi });
        }
        let mut out = vec![0u64; self.shape.states()];
        let mut buf = vec![0u8; hi];
        for (index, count) in self.iter() {
            self.shape.decode_into(index, &mut buf);
            out[buf[t - 1] as usize - 1] += count;
        }
        Ok(out)
    }

    /// Returns `self + sign·move`, or [`Error::Negativity`] if a count would drop below zero.
    pub fn apply_move(&self, mv: &Move, sign: i64) -> Result<PathTable> {
        let mut out = self.clone();
        out.apply_move_in_place(mv, sign)?;
        Ok(out)
    }

    /// In-place variant of [`apply_move`](Self::apply_move). Leaves `self`
    /// untouched on error.
    pub fn apply_move_in_place(&mut self, mv: &Move, sign: i64) -> Result<()> {
        self.shape.check_same(&mv.shape())?;
        assert!(sign == 1 || sign == -1, "sign must be ±1");
        if let Some(bad) = self.first_negative(mv, sign) {
            return Err(Error::Negativity {
                path: self.shape.label(bad),
            });
        }
        let mut total = self.total as i64;
        for (index, d) in mv.iter() {
            let d = d * sign;
            total += d;
            let next = self.count_index(index) as i64 + d;
            if next == 0 {
                self.counts.remove(&index);
            } else {
                self.counts.insert(index, next as u64);
            }
        }
        self.total = total as u64;
        Ok(())
    }

    /// First cell (if any) that `self + sign·move` would make negative.
    pub fn first_negative(&self, mv: &Move, sign: i64) -> Option<u64> {
        mv.iter()
            .find(|&(index, d)| (self.count_index(index) as i64) + d * sign < 0)
            .map(|(index, _)| index)
    }

    /// Whether `self + sign·move` stays nonnegative.
    pub fn can_apply(&self, mv: &Move, sign: i64) -> bool {
        self.first_negative(mv, sign).is_none()
    }
}

impl fmt::Display for PathTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (index, count)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", self.shape.label(index), count)?;
        }
        f.write_str("}")
    }
}

/// Sufficient statistic `b`: initial-state counts `x¹_i` and pooled
/// transition counts `x⁺_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuffStat {
    states: usize,
    initial: Vec<u64>,
    transitions: Vec<u64>,
}

impl SuffStat {
    /// `transitions` is the row-major `S×S` matrix of pooled counts.
    pub fn new(initial: Vec<u64>, transitions: Vec<u64>) -> Result<Self> {
        let states = initial.len();
        if transitions.len() != states * states {
            return Err(Error::InvalidShape(format!(
                "transition block has {} entries, expected {}",
                transitions.len(),
                states * states
            )));
        }
        Ok(SuffStat {
            states,
            initial,
            transitions,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> &[u64] {
        &self.initial
    }

    /// Row-major `S×S` pooled transition counts.
    pub fn transitions(&self) -> &[u64] {
        &self.transitions
    }

    /// `x⁺_ij`, 1-based.
    pub fn transition(&self, i: usize, j: usize) -> u64 {
        self.transitions[(i - 1) * self.states + (j - 1)]
    }

    /// Number of paths `N`.
    pub fn paths(&self) -> u64 {
        self.initial.iter().sum()
    }

    /// `b` in configuration row order: `x¹_1..x¹_S`, then `x⁺_ij` row-major.
    pub fn as_vector(&self) -> Vec<u64> {
        self.initial.iter().chain(&self.transitions).copied().collect()
    }
}

impl fmt::Display for SuffStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "initial=({}) transitions=({})",
            self.initial.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
            self.transitions
                .chunks(self.states)
                .map(|row| format!("({})", row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s24() -> Shape {
        Shape::new(2, 4).unwrap()
    }

    #[test]
    fn suff_stat_examples() {
        let t = PathTable::from_digit_counts(s24(), &[("1122", 1)]).unwrap();
        let b = t.suff_stat();
        assert_eq!(b.initial(), &[1, 0]);
        assert_eq!(b.transitions(), &[1, 1, 0, 1]);

        let b = PathTable::from_digit_counts(s24(), &[("1111", 1)]).unwrap().suff_stat();
        assert_eq!(b.as_vector(), vec![1, 0, 3, 0, 0, 0]);

        let b = PathTable::from_digit_counts(s24(), &[("1212", 1)]).unwrap().suff_stat();
        assert_eq!(b.as_vector(), vec![1, 0, 0, 2, 1, 0]);
    }

    #[test]
    fn slice_and_node_counts() {
        let t = PathTable::from_digit_counts(s24(), &[("1122", 2)]).unwrap();
        assert_eq!(t.slice_transition_counts(2).unwrap(), vec![vec![0, 2], vec![0, 0]]);
        let t = PathTable::from_digit_counts(s24(), &[("1122", 1), ("2211", 1)]).unwrap();
        assert_eq!(t.slice_transition_counts(1).unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert!(t.slice_transition_counts(0).is_err());
        assert!(t.slice_transition_counts(4).is_err());

        let t = PathTable::from_digit_counts(s24(), &[("1122", 3)]).unwrap();
        assert_eq!(t.node_counts(3).unwrap(), vec![0, 3]);
        assert!(t.node_counts(5).is_err());
    }

    #[test]
    fn degree_one_move_application() {
        let shape = s24();
        let table = PathTable::from_digit_counts(shape, &[("1121", 1)]).unwrap();
        let mv = Move::from_digit_entries(shape, &[("1121", -1), ("1211", 1)]).unwrap();
        let moved = table.apply_move(&mv, 1).unwrap();
        assert_eq!(moved, PathTable::from_digit_counts(shape, &[("1211", 1)]).unwrap());
        assert_eq!(moved.suff_stat(), table.suff_stat());
        assert!(matches!(table.apply_move(&mv, -1), Err(Error::Negativity { .. })));
        assert_eq!(moved.apply_move(&mv, -1).unwrap(), table);
    }

    #[test]
    fn display_is_readable() {
        let t = PathTable::from_digit_counts(s24(), &[("1122", 2), ("2111", 1)]).unwrap();
        assert_eq!(t.to_string(), "{1122:2, 2111:1}");
        assert_eq!(t.units(), vec![3, 3, 8]);
    }
}
