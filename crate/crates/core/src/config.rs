//! The configuration matrix `A` mapping tables to sufficient statistics.
//!
//! Rows are ordered `x¹_1..x¹_S` followed by `x⁺_ij` in row-major `(i, j)`
//! order; columns follow the lexicographic path order, so `b = A·x`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::moves::Move;
use crate::par;
use crate::path::Shape;
use crate::rank::integer_rank;

/// Largest `S^T` for which a dense configuration is materialised.
pub const DEFAULT_CELL_CAP: u64 = 1 << 20;

/// Dense `S(S+1) × S^T` configuration matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    shape: Shape,
    /// Column-major: `columns[c]` has `S + S²` entries.
    columns: Vec<Vec<u32>>,
}

/// Column of `A` for path `index` without materialising the matrix.
pub fn column(shape: Shape, index: u64) -> Vec<u32> {
    let s = shape.states();
    let mut col = vec![0u32; s + s * s];
    let states = shape.decode(index);
    col[states[0] as usize - 1] = 1;
    for w in states.windows(2) {
        col[s + (w[0] as usize - 1) * s + (w[1] as usize - 1)] += 1;
    }
    col
}

/// Builds `A` for `(S, T)`, refusing shapes with more than `cap` columns.
pub fn build_configuration(shape: Shape, cap: u64) -> Result<Configuration> {
    if shape.cells() > cap {
        return Err(Error::CapExceeded {
            what: "configuration columns S^T",
            requested: shape.cells() as u128,
            limit: cap as u128,
        });
    }
    let indices: Vec<u64> = shape.all_indices().collect();
    let columns = par::map(&indices, 0, |&i| column(shape, i));
    Ok(Configuration { shape, columns })
}

impl Configuration {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn n_rows(&self) -> usize {
        let s = self.shape.states();
        s + s * s
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.columns[col][row]
    }

    pub fn column(&self, col: usize) -> &[u32] {
        &self.columns[col]
    }

    /// Row-major copy of the matrix.
    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.n_rows())
            .map(|r| self.columns.iter().map(|c| c[r] as i64).collect())
            .collect()
    }

    /// `A·z` for a move with the same shape.
    pub fn apply(&self, mv: &Move) -> Result<Vec<i64>> {
        self.shape.check_same(&mv.shape())?;
        let mut out = vec![0i64; self.n_rows()];
        for (index, v) in mv.iter() {
            for (o, &a) in out.iter_mut().zip(&self.columns[index as usize]) {
                *o += a as i64 * v;
            }
        }
        Ok(out)
    }

    /// Equivalence classes of identical columns (non-singleton only),
    /// each sorted, listed by smallest member.
    pub fn identical_column_classes(&self) -> Vec<Vec<u64>> {
        let mut buckets: HashMap<&[u32], Vec<u64>> = HashMap::new();
        for (c, col) in self.columns.iter().enumerate() {
            buckets.entry(col.as_slice()).or_default().push(c as u64);
        }
        let mut classes: Vec<Vec<u64>> = buckets.into_values().filter(|v| v.len() > 1).collect();
        classes.sort();
        classes
    }

    /// Exact rank of `A`.
    pub fn design_rank(&self) -> Result<usize> {
        integer_rank(&self.rows())
    }

    /// Plain-text dump: `"rows cols"` then row-major integers.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n_rows(), self.n_cols());
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Whether `A·z = 0` for the configuration of the move's shape.
///
/// Columns are generated on the fly, so this works for any shape.
pub fn is_valid_move(mv: &Move) -> bool {
    let shape = mv.shape();
    let s = shape.states();
    let mut acc = vec![0i64; s + s * s];
    for (index, v) in mv.iter() {
        for (a, c) in acc.iter_mut().zip(column(shape, index)) {
            *a += c as i64 * v;
        }
    }
    acc.iter().all(|&a| a == 0)
}

/// One `+1/−1` move per unordered pair inside each identical-column class.
/// The lower path index carries `+1`.
pub fn degree_one_moves(shape: Shape, cap: u64) -> Result<Vec<Move>> {
    let config = build_configuration(shape, cap)?;
    let mut out = Vec::new();
    for class in config.identical_column_classes() {
        for (k, &a) in class.iter().enumerate() {
            for &b in &class[k + 1..] {
                out.push(Move::from_parts(shape, &[a], &[b])?);
            }
        }
    }
    Ok(out)
}

/// Stacked per-slice transition indicators: the design of the
/// non-homogeneous (linearly ordered conditional independence) model.
pub fn h1_design(shape: Shape, cap: u64) -> Result<Vec<Vec<i64>>> {
    if shape.cells() > cap {
        return Err(Error::CapExceeded {
            what: "design columns S^T",
            requested: shape.cells() as u128,
            limit: cap as u128,
        });
    }
    let s = shape.states();
    let len = shape.length();
    let mut rows = vec![vec![0i64; shape.cells() as usize]; (len - 1) * s * s];
    let mut buf = vec![0u8; len];
    for index in shape.all_indices() {
        shape.decode_into(index, &mut buf);
        for (t, w) in buf.windows(2).enumerate() {
            rows[shape.edge_slot(t, w[0] as usize - 1, w[1] as usize - 1)][index as usize] = 1;
        }
    }
    Ok(rows)
}

pub fn h1_rank(shape: Shape, cap: u64) -> Result<usize> {
    integer_rank(&h1_design(shape, cap)?)
}

/// Degrees of freedom of THMC against the non-homogeneous chain:
/// `rank(H1 design) − rank(A)`.
pub fn degrees_of_freedom(shape: Shape, cap: u64) -> Result<usize> {
    let config = build_configuration(shape, cap)?;
    Ok(h1_rank(shape, cap)? - config.design_rank()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(s: usize, t: usize) -> Shape {
        Shape::new(s, t).unwrap()
    }

    #[test]
    fn column_of_121() {
        let sh = shape(2, 3);
        let c = build_configuration(sh, DEFAULT_CELL_CAP).unwrap();
        let idx = crate::StatePath::parse_digits(sh, "121").unwrap().index() as usize;
        assert_eq!(c.column(idx), &[1, 0, 0, 1, 1, 0]);
    }

    #[test]
    fn columns_sum_to_length() {
        for (s, t) in [(2, 3), (2, 5), (3, 3), (3, 4)] {
            let c = build_configuration(shape(s, t), DEFAULT_CELL_CAP).unwrap();
            for col in 0..c.n_cols() {
                assert_eq!(c.column(col).iter().sum::<u32>() as usize, t);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            build_configuration(shape(3, 5), 100),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn no_identical_columns_for_length_three() {
        let c = build_configuration(shape(2, 3), DEFAULT_CELL_CAP).unwrap();
        assert!(c.identical_column_classes().is_empty());
        assert!(degree_one_moves(shape(2, 3), DEFAULT_CELL_CAP).unwrap().is_empty());
    }

    #[test]
    fn invalid_move_detected() {
        let sh = shape(2, 4);
        let mv = Move::from_digit_entries(sh, &[("1111", 1)]).unwrap();
        assert!(!is_valid_move(&mv));
        let mv = Move::from_digit_entries(sh, &[("1121", 1), ("1211", -1)]).unwrap();
        assert!(is_valid_move(&mv));
    }

    #[test]
    fn text_dump_layout() {
        let c = build_configuration(shape(2, 3), DEFAULT_CELL_CAP).unwrap();
        let text = c.to_text();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("6 8"));
        assert_eq!(lines.next(), Some("1 1 1 1 0 0 0 0"));
        assert_eq!(text.lines().count(), 7);
    }
}
