//! Fibers `F(b) = {x ≥ 0 : A·x = b}`: enumeration, connectivity under a
//! basis, and the exact conditional distribution.

use std::collections::HashMap;

use crate::basis::MoveGenerator;
use crate::config::column;
use crate::error::{Error, Result};
use crate::par;
use crate::path::Shape;
use crate::table::{PathTable, SuffStat};

/// Default limit on `N·S^T` for fiber enumeration.
pub const DEFAULT_FIBER_CAP: u128 = 10_000_000;

/// All tables sharing one sufficient statistic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fiber {
    shape: Shape,
    stat: SuffStat,
    members: Vec<Vec<u64>>,
}

impl Fiber {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn statistic(&self) -> &SuffStat {
        &self.stat
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members as sorted multisets of path indices, in lexicographic order.
    pub fn units(&self) -> &[Vec<u64>] {
        &self.members
    }

    pub fn tables(&self) -> Vec<PathTable> {
        self.members
            .iter()
            .map(|u| PathTable::from_indices(self.shape, u).expect("fiber members are valid"))
            .collect()
    }

    pub fn contains(&self, table: &PathTable) -> bool {
        table.shape() == self.shape && self.members.binary_search(&table.units()).is_ok()
    }
}

/// Enumerates `F(b)` for paths of length `length` by depth-first search
/// over non-decreasing path indices with budget pruning.
///
/// Fails with [`Error::CapExceeded`] when `N·S^T` or the number of search
/// nodes visited exceeds `cap`.
pub fn enumerate_fiber(b: &SuffStat, length: usize, cap: u128) -> Result<Fiber> {
    let shape = Shape::new(b.states(), length)?;
    let n = b.paths();
    let transitions: u64 = b.transitions().iter().sum();
    if transitions != n * (length as u64 - 1) {
        return Err(Error::InvalidShape(format!(
            "statistic has {transitions} transitions, expected N(T-1) = {}",
            n * (length as u64 - 1)
        )));
    }
    let work = n as u128 * shape.cells() as u128;
    if work > cap {
        return Err(Error::CapExceeded { what: "fiber work N*S^T", requested: work, limit: cap });
    }
    let target: Vec<i64> = b.as_vector().iter().map(|&v| v as i64).collect();

    // Candidate paths whose column fits inside b.
    let mut candidates: Vec<(u64, Vec<i64>)> = Vec::new();
    let mut by_column: HashMap<Vec<i64>, Vec<u64>> = HashMap::new();
    for index in shape.all_indices() {
        let col: Vec<i64> = column(shape, index).into_iter().map(i64::from).collect();
        if col.iter().zip(&target).all(|(c, t)| c <= t) {
            by_column.entry(col.clone()).or_default().push(index);
            candidates.push((index, col));
        }
    }

    let mut members = Vec::new();
    if n > 0 {
        let mut state = Search {
            candidates: &candidates,
            by_column: &by_column,
            remaining: target,
            chosen: Vec::with_capacity(n as usize),
            out: &mut members,
            nodes: 0,
            cap,
        };
        state.descend(0, n as usize);
        if state.nodes > cap {
            return Err(Error::CapExceeded { what: "fiber search nodes", requested: state.nodes, limit: cap });
        }
    } else {
        members.push(Vec::new());
    }
    Ok(Fiber { shape, stat: b.clone(), members })
}

struct Search<'a> {
    candidates: &'a [(u64, Vec<i64>)],
    by_column: &'a HashMap<Vec<i64>, Vec<u64>>,
    remaining: Vec<i64>,
    chosen: Vec<u64>,
    out: &'a mut Vec<Vec<u64>>,
    nodes: u128,
    cap: u128,
}

impl Search<'_> {
    fn descend(&mut self, from: usize, left: usize) {
        self.nodes += 1;
        if self.nodes > self.cap {
            return;
        }
        if left == 1 {
            // The last path is forced: its column must equal the remainder.
            let last = self.chosen.last().copied();
            if let Some(paths) = self.by_column.get(&self.remaining) {
                for &p in paths {
                    if last.is_none_or(|l| p >= l) {
                        let mut m = self.chosen.clone();
                        m.push(p);
                        self.out.push(m);
                    }
                }
            }
            return;
        }
        for k in from..self.candidates.len() {
            let (index, col) = &self.candidates[k];
            if col.iter().zip(&self.remaining).any(|(c, r)| c > r) {
                continue;
            }
            for (r, c) in self.remaining.iter_mut().zip(col) {
                *r -= c;
            }
            self.chosen.push(*index);
            self.descend(k, left - 1);
            if self.nodes > self.cap {
                return;
            }
            self.chosen.pop();
            for (r, c) in self.remaining.iter_mut().zip(col) {
                *r += c;
            }
        }
    }
}

/// Every table with exactly `n` paths, grouped into fibers.
/// Fibers are ordered by statistic; members are sorted.
pub fn fibers_of_size(shape: Shape, n: usize, cap: u128) -> Result<Vec<Fiber>> {
    let cells = shape.cells() as u128;
    // number of multisets C(cells + n − 1, n)
    let mut count: u128 = 1;
    for k in 0..n as u128 {
        count = count
            .checked_mul(cells + k)
            .ok_or(Error::Overflow("table count"))?
            / (k + 1);
    }
    if count > cap {
        return Err(Error::CapExceeded { what: "tables of size N", requested: count, limit: cap });
    }
    let s = shape.states();
    let cols: Vec<Vec<u64>> = shape
        .all_indices()
        .map(|i| column(shape, i).into_iter().map(u64::from).collect())
        .collect();
    let mut groups: HashMap<Vec<u64>, Vec<Vec<u64>>> = HashMap::new();
    let mut units = vec![0u64; n];
    let mut stat = vec![0u64; s + s * s];
    fn rec(
        pos: usize,
        from: u64,
        units: &mut Vec<u64>,
        stat: &mut Vec<u64>,
        cols: &[Vec<u64>],
        groups: &mut HashMap<Vec<u64>, Vec<Vec<u64>>>,
    ) {
        if pos == units.len() {
            groups.entry(stat.clone()).or_default().push(units.clone());
            return;
        }
        for p in from..cols.len() as u64 {
            units[pos] = p;
            for (a, c) in stat.iter_mut().zip(&cols[p as usize]) {
                *a += c;
            }
            rec(pos + 1, p, units, stat, cols, groups);
            for (a, c) in stat.iter_mut().zip(&cols[p as usize]) {
                *a -= c;
            }
        }
    }
    rec(0, 0, &mut units, &mut stat, &cols, &mut groups);
    let mut fibers: Vec<Fiber> = groups
        .into_iter()
        .map(|(b, mut members)| {
            members.sort();
            let stat = SuffStat::new(b[..s].to_vec(), b[s..].to_vec()).expect("consistent statistic");
            Fiber { shape, stat, members }
        })
        .collect();
    fibers.sort_by_key(|f| f.stat.as_vector());
    Ok(fibers)
}

/// Connected components of a fiber's move graph under `basis`.
///
/// Every neighbour must lie in the fiber; anything else means the
/// generator produced a move with `A·z ≠ 0`.
pub fn connected_components(fiber: &Fiber, basis: &dyn MoveGenerator) -> Result<usize> {
    fiber.shape.check_same(&basis.shape())?;
    let members = &fiber.members;
    let position: HashMap<&[u64], usize> =
        members.iter().enumerate().map(|(k, m)| (m.as_slice(), k)).collect();
    let mut parent: Vec<usize> = (0..members.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = members.len();
    let mut buf = Vec::new();
    for (k, m) in members.iter().enumerate() {
        buf.clear();
        basis.neighbors(m, &mut buf)?;
        for y in &buf {
            let &j = position.get(y.as_slice()).ok_or_else(|| {
                Error::InvalidTemplate(format!("basis move leaves the fiber of {}", fiber.stat))
            })?;
            let (a, b) = (find(&mut parent, k), find(&mut parent, j));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
    }
    Ok(components)
}

/// Whether the move graph on `fiber` is connected.
pub fn check_connectivity(fiber: &Fiber, basis: &dyn MoveGenerator) -> Result<bool> {
    Ok(fiber.is_empty() || connected_components(fiber, basis)? == 1)
}

/// Connectivity of one fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberVerdict {
    pub paths: usize,
    pub statistic: SuffStat,
    pub members: usize,
    pub components: usize,
}

impl FiberVerdict {
    pub fn connected(&self) -> bool {
        self.components <= 1
    }
}

/// Outcome of an exhaustive connectivity check, one verdict per fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub max_n: usize,
    pub verdicts: Vec<FiberVerdict>,
}

impl ConnectivityReport {
    pub fn connected(&self) -> bool {
        self.verdicts.iter().all(FiberVerdict::connected)
    }

    pub fn disconnected(&self) -> Vec<&FiberVerdict> {
        self.verdicts.iter().filter(|v| !v.connected()).collect()
    }

    pub fn tables(&self) -> usize {
        self.verdicts.iter().map(|v| v.members).sum()
    }

    pub fn largest_fiber(&self) -> usize {
        self.verdicts.iter().map(|v| v.members).max().unwrap_or(0)
    }
}

/// Checks connectivity of every fiber with `1 ≤ N ≤ max_n`, fanning out
/// over fibers.
pub fn verify_connectivity(
    basis: &dyn MoveGenerator,
    max_n: usize,
    threads: usize,
    cap: u128,
) -> Result<ConnectivityReport> {
    let shape = basis.shape();
    let mut verdicts = Vec::new();
    for n in 1..=max_n {
        let fibers = fibers_of_size(shape, n, cap)?;
        let results = par::map(&fibers, threads, |f| connected_components(f, basis));
        for (f, r) in fibers.into_iter().zip(results) {
            verdicts.push(FiberVerdict {
                paths: n,
                members: f.len(),
                statistic: f.stat,
                components: r?,
            });
        }
    }
    Ok(ConnectivityReport { max_n, verdicts })
}

fn factorial_u128(n: u64) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k).ok_or(Error::Overflow("factorial")))
}

/// Exact conditional law on a fiber under THMC: `P(x | b) ∝ N!/Π x(ω)!`.
///
/// Returns `(table, weight, probability)` with exact integer weights;
/// requires `N ≤ 34` so that `N!` fits in `u128`.
pub fn exact_conditional(fiber: &Fiber) -> Result<Vec<(PathTable, u128, f64)>> {
    let n = fiber.stat.paths();
    let total_fact = factorial_u128(n)?;
    let mut out = Vec::with_capacity(fiber.len());
    let mut sum = 0u128;
    for table in fiber.tables() {
        let denom = table
            .iter()
            .try_fold(1u128, |acc, (_, c)| Ok::<_, Error>(acc * factorial_u128(c)?))?;
        let w = total_fact / denom;
        sum = sum.checked_add(w).ok_or(Error::Overflow("fiber weight sum"))?;
        out.push((table, w, 0.0));
    }
    for entry in &mut out {
        entry.2 = entry.1 as f64 / sum as f64;
    }
    Ok(out)
}

/// `Σ_t Σ_ij |x^t_ij − y^t_ij|` over per-slice transition counts.
pub fn l1_move_norm(x: &PathTable, y: &PathTable) -> Result<u64> {
    x.shape().check_same(&y.shape())?;
    Ok(x.edge_counts()
        .iter()
        .zip(y.edge_counts())
        .map(|(a, b)| a.abs_diff(b))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::markov_basis;

    fn shape(s: usize, t: usize) -> Shape {
        Shape::new(s, t).unwrap()
    }

    #[test]
    fn small_fiber_members() {
        let sh = shape(2, 3);
        let x = PathTable::from_digit_counts(sh, &[("112", 1), ("221", 1)]).unwrap();
        let f = enumerate_fiber(&x.suff_stat(), 3, DEFAULT_FIBER_CAP).unwrap();
        let y = PathTable::from_digit_counts(sh, &[("122", 1), ("211", 1)]).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.contains(&x) && f.contains(&y));
        assert!(check_connectivity(&f, &markov_basis(sh).unwrap()).unwrap());
    }

    #[test]
    fn grouping_matches_direct_enumeration() {
        for (s, t, n) in [(2, 4, 3), (3, 3, 2), (2, 5, 2)] {
            let sh = shape(s, t);
            for f in fibers_of_size(sh, n, DEFAULT_FIBER_CAP).unwrap() {
                let g = enumerate_fiber(f.statistic(), t, DEFAULT_FIBER_CAP).unwrap();
                assert_eq!(f, g);
            }
        }
    }

    #[test]
    fn fiber_cap() {
        let x = PathTable::from_digit_counts(shape(3, 3), &[("123", 5)]).unwrap();
        assert!(matches!(
            enumerate_fiber(&x.suff_stat(), 3, 10),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn exact_weights() {
        let sh = shape(2, 3);
        let x = PathTable::from_digit_counts(sh, &[("112", 1), ("221", 1)]).unwrap();
        let f = enumerate_fiber(&x.suff_stat(), 3, DEFAULT_FIBER_CAP).unwrap();
        let law = exact_conditional(&f).unwrap();
        assert!(law.iter().all(|(_, w, p)| *w == 2 && (*p - 0.5).abs() < 1e-15));
    }

    #[test]
    fn l1_examples() {
        let sh = shape(2, 3);
        let t = |e: &[(&str, u64)]| PathTable::from_digit_counts(sh, e).unwrap();
        let a = t(&[("112", 1), ("221", 1)]);
        assert_eq!(l1_move_norm(&a, &t(&[("121", 1), ("212", 1)])).unwrap(), 4);
        assert_eq!(l1_move_norm(&a, &t(&[("122", 1), ("211", 1)])).unwrap(), 8);
        assert_eq!(l1_move_norm(&a, &a).unwrap(), 0);
    }
}
