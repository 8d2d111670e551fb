//! Exact rank of integer matrices by fraction-free (Bareiss) elimination.

use crate::error::{Error, Result};

/// Rank over the rationals of an integer matrix given as rows.
///
/// Every intermediate entry is a minor of the input, so the divisions are
/// exact; overflow of `i128` is reported rather than wrapped.
pub fn integer_rank(rows: &[Vec<i64>]) -> Result<usize> {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != n_cols) {
        return Err(Error::InvalidShape("ragged matrix".into()));
    }

    let mut prev: i128 = 1;
    let mut rank = 0;
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let p = pivot_row[col];
        for row in rest.iter_mut() {
            let lead = row[col];
            for j in col + 1..n_cols {
                let a = p.checked_mul(row[j]).ok_or(Error::Overflow("rank elimination"))?;
                let b = lead.checked_mul(pivot_row[j]).ok_or(Error::Overflow("rank elimination"))?;
                let num = a.checked_sub(b).ok_or(Error::Overflow("rank elimination"))?;
                debug_assert_eq!(num % prev, 0);
                row[j] = num / prev;
            }
            row[col] = 0;
        }
        prev = p;
        rank += 1;
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        assert_eq!(integer_rank(&[]).unwrap(), 0);
        assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]).unwrap(), 0);
        assert_eq!(integer_rank(&[vec![1, 2], vec![2, 4]]).unwrap(), 1);
        assert_eq!(integer_rank(&[vec![2, 3], vec![4, 5]]).unwrap(), 2);
        assert_eq!(
            integer_rank(&[vec![0, 1, 2], vec![0, 2, 4], vec![1, 0, 1]]).unwrap(),
            2
        );
        // rank is unaffected by a dependent row made of large multiples
        assert_eq!(
            integer_rank(&[vec![3, 1, 4, 1], vec![5, 9, 2, 6], vec![3 * 7 + 5 * 11, 7 + 99, 28 + 22, 7 + 66]]).unwrap(),
            2
        );
    }
}
