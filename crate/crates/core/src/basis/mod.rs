//! Markov bases for the THMC model.
//!
//! A basis is described by its move families rather than a materialised
//! list. [`MoveGenerator`] is what the sampler and the fiber checker need:
//! symmetric random proposals and the basis neighbours of a table.

mod enumerate;
mod neighbors;
pub mod templates;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::config::{build_configuration, is_valid_move, DEFAULT_CELL_CAP};
use crate::error::{Error, Result};
use crate::moves::Move;
use crate::path::Shape;
use crate::table::PathTable;

pub use enumerate::{enumerate_moves, DEFAULT_MOVE_CAP};
pub use templates::{crossing_swap, m_permutation, two_by_two_swap, type4_move, TwoByTwo};

use templates::{swap_tails, two_by_two_from_states};

/// A family of basis moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Degree 2 exchange of tails after a shared node.
    CrossingSwap,
    /// `+ω − ω′` for paths with identical configuration columns.
    DegreeOne,
    /// Two crossing-like swaps at times `t < t′` sharing four edges.
    TwoByTwoSwap,
    /// Two-state block swap `aab ↔ abb` at distinct times.
    Type4Swap,
    /// `m` by `m` permutation moves for `T = 3`.
    Permutation(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::CrossingSwap => f.write_str("crossing-swap"),
            Family::DegreeOne => f.write_str("degree-one"),
            Family::TwoByTwoSwap => f.write_str("two-by-two-swap"),
            Family::Type4Swap => f.write_str("type4-swap"),
            Family::Permutation(m) => write!(f, "permutation-{m}"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crossing-swap" => Ok(Family::CrossingSwap),
            "degree-one" => Ok(Family::DegreeOne),
            "two-by-two-swap" => Ok(Family::TwoByTwoSwap),
            "type4-swap" => Ok(Family::Type4Swap),
            _ => s
                .strip_prefix("permutation-")
                .and_then(|m| m.parse().ok())
                .map(Family::Permutation)
                .ok_or_else(|| Error::InvalidTemplate(format!("unknown move family {s:?}"))),
        }
    }
}

/// Source of basis moves for a fixed shape.
pub trait MoveGenerator: Send + Sync {
    fn shape(&self) -> Shape;

    /// A random basis move. The distribution does not depend on any table,
    /// so applying it with a fair random sign gives a symmetric proposal.
    /// May return the zero move.
    fn random_move(&self, rng: &mut dyn RngCore) -> Move;

    /// Tables reachable from `units` (a sorted multiset of path indices)
    /// by one basis move, as sorted multisets. Duplicates are allowed.
    fn neighbors(&self, units: &[u64], out: &mut Vec<Vec<u64>>) -> Result<()>;

    /// Number of local kernels: groups of moves that each touch at most
    /// [`kernel_degree`](Self::kernel_degree) paths. Zero when the
    /// generator only supports [`random_move`](Self::random_move).
    fn local_kernels(&self) -> usize {
        0
    }

    fn kernel_degree(&self, _kernel: usize) -> usize {
        0
    }

    /// Like [`neighbors`](Self::neighbors), restricted to one kernel.
    fn kernel_neighbors(&self, _kernel: usize, units: &[u64], out: &mut Vec<Vec<u64>>) -> Result<()> {
        self.neighbors(units, out)
    }
}

type PermutationIndex = HashMap<Vec<u64>, Vec<Vec<u64>>>;

/// Family-level description of a Markov basis.
#[derive(Clone, Debug)]
pub struct BasisDescriptor {
    shape: Shape,
    families: Vec<Family>,
    classes: Arc<Vec<Vec<u64>>>,
    class_of: Arc<HashMap<u64, usize>>,
    permutations: Arc<OnceLock<Result<PermutationIndex>>>,
}

/// The Markov basis for `(S, T)`: the two-state families for `S = 2`, the
/// crossing and permutation families for `T = 3`. Other shapes have no
/// known closed form and yield [`Error::UnsupportedShape`].
pub fn markov_basis(shape: Shape) -> Result<BasisDescriptor> {
    if shape.states() == 2 {
        BasisDescriptor::two_state(shape)
    } else if shape.length() == 3 {
        BasisDescriptor::length_three(shape)
    } else {
        Err(Error::UnsupportedShape {
            states: shape.states(),
            length: shape.length(),
        })
    }
}

impl BasisDescriptor {
    /// `S = 2`: crossing swaps, degree-one moves and 2 by 2 swaps, plus
    /// type 4 swaps when `T ≥ 4`.
    pub fn two_state(shape: Shape) -> Result<Self> {
        if shape.states() != 2 {
            return Err(Error::UnsupportedShape {
                states: shape.states(),
                length: shape.length(),
            });
        }
        let mut families = vec![Family::CrossingSwap, Family::DegreeOne, Family::TwoByTwoSwap];
        if shape.length() >= 4 {
            families.push(Family::Type4Swap);
        }
        Self::with_families(shape, families)
    }

    /// `T = 3`: crossing swaps and `m` by `m` permutations, `2 ≤ m ≤ S`.
    pub fn length_three(shape: Shape) -> Result<Self> {
        if shape.length() != 3 {
            return Err(Error::UnsupportedShape {
                states: shape.states(),
                length: shape.length(),
            });
        }
        let mut families = vec![Family::CrossingSwap];
        families.extend((2..=shape.states()).map(Family::Permutation));
        Self::with_families(shape, families)
    }

    /// An arbitrary family set, e.g. a deliberately incomplete basis.
    pub fn with_families(shape: Shape, families: Vec<Family>) -> Result<Self> {
        for f in &families {
            match *f {
                Family::Type4Swap if shape.states() != 2 || shape.length() < 4 => {
                    return Err(Error::InvalidTemplate(format!(
                        "type 4 swaps need S = 2 and T >= 4, got {shape}"
                    )))
                }
                Family::Permutation(m) if shape.length() != 3 || m < 2 || m > shape.states() => {
                    return Err(Error::InvalidTemplate(format!(
                        "permutation-{m} needs T = 3 and 2 <= m <= S, got {shape}"
                    )))
                }
                _ => {}
            }
        }
        let mut families = families;
        families.sort();
        families.dedup();
        let classes = if families.contains(&Family::DegreeOne) {
            build_configuration(shape, DEFAULT_CELL_CAP)?.identical_column_classes()
        } else {
            Vec::new()
        };
        let class_of = classes
            .iter()
            .enumerate()
            .flat_map(|(c, members)| members.iter().map(move |&m| (m, c)))
            .collect();
        Ok(BasisDescriptor {
            shape,
            families,
            classes: Arc::new(classes),
            class_of: Arc::new(class_of),
            permutations: Arc::new(OnceLock::new()),
        })
    }

    /// Same basis with one family removed.
    pub fn without(&self, family: Family) -> Self {
        let mut out = self.clone();
        out.families.retain(|f| *f != family);
        out.permutations = Arc::new(OnceLock::new());
        out
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn has(&self, family: Family) -> bool {
        self.families.contains(&family)
    }

    /// Identical-column classes backing the degree-one family.
    pub fn degree_one_classes(&self) -> &[Vec<u64>] {
        &self.classes
    }

    /// Families that can produce a nonzero move for this shape.
    fn active_families(&self) -> impl Iterator<Item = Family> + '_ {
        self.families
            .iter()
            .copied()
            .filter(|f| *f != Family::DegreeOne || !self.classes.is_empty())
    }

    fn permutation_index(&self) -> Result<&PermutationIndex> {
        self.permutations
            .get_or_init(|| build_permutation_index(self.shape, &self.families))
            .as_ref()
            .map_err(Clone::clone)
    }
}

impl fmt::Display for BasisDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.families.iter().map(|f| f.to_string()).collect();
        write!(f, "{}: {}", self.shape, names.join(", "))
    }
}

/// Random path with some 0-based positions pinned.
fn random_path(shape: Shape, pinned: &[(usize, u8)], rng: &mut dyn RngCore) -> Vec<u8> {
    let s = shape.states() as u8;
    let mut out: Vec<u8> = (0..shape.length()).map(|_| rng.random_range(1..=s)).collect();
    for &(pos, v) in pinned {
        out[pos] = v;
    }
    out
}

fn distinct_pair(n: usize, rng: &mut dyn RngCore) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

impl MoveGenerator for BasisDescriptor {
    fn shape(&self) -> Shape {
        self.shape
    }

    fn random_move(&self, rng: &mut dyn RngCore) -> Move {
        let shape = self.shape;
        let (s, len) = (shape.states(), shape.length());
        let active: Vec<Family> = self.active_families().collect();
        if active.is_empty() {
            return Move::zero(shape);
        }
        match active[rng.random_range(0..active.len())] {
            Family::CrossingSwap => {
                let t = rng.random_range(2..len);
                let mut a = random_path(shape, &[], rng);
                let mut b = random_path(shape, &[(t - 1, a[t - 1])], rng);
                let plus = [shape.encode(&a), shape.encode(&b)];
                swap_tails(&mut a, &mut b, t);
                Move::from_parts(shape, &plus, &[shape.encode(&a), shape.encode(&b)])
                    .expect("valid indices")
            }
            Family::DegreeOne => {
                let class = &self.classes[rng.random_range(0..self.classes.len())];
                let (a, b) = distinct_pair(class.len(), rng);
                Move::from_parts(shape, &[class[a]], &[class[b]]).expect("valid indices")
            }
            Family::TwoByTwoSwap => {
                let (x, y) = distinct_pair(len - 1, rng);
                let (t, t2) = (x.min(y) + 1, x.max(y) + 1);
                let (i1, i2) = distinct_pair(s, rng);
                let (j1, j2) = distinct_pair(s, rng);
                let pattern = TwoByTwo { t, t2, i1: i1 + 1, j1: j1 + 1, i2: i2 + 1, j2: j2 + 1 };
                let states: Vec<Vec<u8>> = pattern
                    .required_edges()
                    .iter()
                    .map(|&(t, i, j)| random_path(shape, &[(t - 1, i as u8), (t, j as u8)], rng))
                    .collect();
                let plus: Vec<u64> = states.iter().map(|p| shape.encode(p)).collect();
                two_by_two_from_states(shape, pattern, &states, &plus)
            }
            Family::Type4Swap => {
                let (x, y) = distinct_pair(len - 2, rng);
                let (a, b) = if rng.random_bool(0.5) { (1u8, 2u8) } else { (2, 1) };
                // 0-based block starts x, y
                let first = random_path(shape, &[(x, a), (x + 1, a), (x + 2, b)], rng);
                let second = random_path(shape, &[(y, a), (y + 1, b), (y + 2, b)], rng);
                let mut f = first.clone();
                let mut g = second.clone();
                f[x + 1] = b;
                g[y + 1] = a;
                Move::from_parts(
                    shape,
                    &[shape.encode(&first), shape.encode(&second)],
                    &[shape.encode(&f), shape.encode(&g)],
                )
                .expect("valid indices")
            }
            Family::Permutation(m) => {
                let pick = |rng: &mut dyn RngCore| {
                    let mut all: Vec<usize> = (1..=s).collect();
                    all.shuffle(rng);
                    all.truncate(m);
                    all
                };
                let i_list = pick(rng);
                let j_list = pick(rng);
                let fills: Vec<usize> = (0..s).map(|_| rng.random_range(1..=s)).collect();
                m_permutation(shape, &i_list, &j_list, &fills).expect("valid permutation")
            }
        }
    }

    fn neighbors(&self, units: &[u64], out: &mut Vec<Vec<u64>>) -> Result<()> {
        let ctx = neighbors::Context::new(self.shape, units);
        for family in &self.families {
            match *family {
                Family::CrossingSwap => ctx.crossing(out),
                Family::DegreeOne => ctx.degree_one(&self.classes, &self.class_of, out),
                Family::TwoByTwoSwap => ctx.two_by_two(out),
                Family::Type4Swap => ctx.type4(out),
                Family::Permutation(_) => {}
            }
        }
        if self.families.iter().any(|f| matches!(f, Family::Permutation(_))) {
            ctx.permutations(self.permutation_index()?, out);
        }
        Ok(())
    }

    /// One kernel per active family.
    fn local_kernels(&self) -> usize {
        self.active_families().count()
    }

    fn kernel_degree(&self, kernel: usize) -> usize {
        match self.active_families().nth(kernel) {
            Some(Family::DegreeOne) => 1,
            Some(Family::CrossingSwap | Family::Type4Swap) => 2,
            Some(Family::TwoByTwoSwap) => 4,
            Some(Family::Permutation(m)) => m,
            None => 0,
        }
    }

    /// Permutation kernels share one index, so the kernel for `m` also
    /// yields the smaller permutations supported on its paths.
    fn kernel_neighbors(&self, kernel: usize, units: &[u64], out: &mut Vec<Vec<u64>>) -> Result<()> {
        let ctx = neighbors::Context::new(self.shape, units);
        match self.active_families().nth(kernel) {
            Some(Family::CrossingSwap) => ctx.crossing(out),
            Some(Family::DegreeOne) => ctx.degree_one(&self.classes, &self.class_of, out),
            Some(Family::TwoByTwoSwap) => ctx.two_by_two(out),
            Some(Family::Type4Swap) => ctx.type4(out),
            Some(Family::Permutation(_)) => ctx.permutations(self.permutation_index()?, out),
            None => {}
        }
        Ok(())
    }
}

fn build_permutation_index(shape: Shape, families: &[Family]) -> Result<PermutationIndex> {
    let mut index: PermutationIndex = HashMap::new();
    for f in families {
        if let Family::Permutation(m) = *f {
            enumerate::for_each_permutation(shape, m, DEFAULT_MOVE_CAP, |w1, w2| {
                let mut a: Vec<u64> = w1.iter().map(|p| shape.encode(p)).collect();
                let mut b: Vec<u64> = w2.iter().map(|p| shape.encode(p)).collect();
                a.sort_unstable();
                b.sort_unstable();
                index.entry(a.clone()).or_default().push(b.clone());
                index.entry(b).or_default().push(a);
            })?;
        }
    }
    for v in index.values_mut() {
        v.sort();
        v.dedup();
    }
    Ok(index)
}

/// An explicit list of moves, e.g. read from a 4ti2 `.mar` file.
#[derive(Clone, Debug)]
pub struct MoveList {
    shape: Shape,
    moves: Vec<Move>,
}

impl MoveList {
    /// Rejects moves of another shape or with `A·z ≠ 0`. Zero moves are
    /// dropped.
    pub fn new(shape: Shape, moves: Vec<Move>) -> Result<Self> {
        let mut kept = Vec::with_capacity(moves.len());
        for (k, mv) in moves.into_iter().enumerate() {
            shape.check_same(&mv.shape())?;
            if !is_valid_move(&mv) {
                return Err(Error::InvalidTemplate(format!(
                    "move {} does not preserve the sufficient statistics",
                    k + 1
                )));
            }
            if !mv.is_zero() {
                kept.push(mv);
            }
        }
        Ok(MoveList { shape, moves: kept })
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

impl MoveGenerator for MoveList {
    fn shape(&self) -> Shape {
        self.shape
    }

    fn random_move(&self, rng: &mut dyn RngCore) -> Move {
        if self.moves.is_empty() {
            return Move::zero(self.shape);
        }
        self.moves[rng.random_range(0..self.moves.len())].clone()
    }

    fn neighbors(&self, units: &[u64], out: &mut Vec<Vec<u64>>) -> Result<()> {
        let mut counts: HashMap<u64, i64> = HashMap::new();
        for &u in units {
            *counts.entry(u).or_default() += 1;
        }
        for mv in &self.moves {
            for sign in [1, -1] {
                let fits = mv
                    .iter()
                    .all(|(i, v)| sign * v >= 0 || counts.get(&i).copied().unwrap_or(0) >= -sign * v);
                if !fits {
                    continue;
                }
                let mut y = counts.clone();
                for (i, v) in mv.iter() {
                    *y.entry(i).or_default() += sign * v;
                }
                let mut next: Vec<u64> = y
                    .into_iter()
                    .flat_map(|(i, c)| std::iter::repeat_n(i, c as usize))
                    .collect();
                next.sort_unstable();
                out.push(next);
            }
        }
        Ok(())
    }
}

/// Draws one basis move for proposals on `table`'s fiber.
///
/// The move does not depend on the contents of `table`; see
/// [`MoveGenerator::random_move`].
pub fn random_move(table: &PathTable, basis: &dyn MoveGenerator, rng: &mut dyn RngCore) -> Result<Move> {
    basis.shape().check_same(&table.shape())?;
    Ok(basis.random_move(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(s: usize, t: usize) -> Shape {
        Shape::new(s, t).unwrap()
    }

    #[test]
    fn dispatch_by_shape() {
        let b = markov_basis(shape(2, 3)).unwrap();
        assert_eq!(
            b.families(),
            &[Family::CrossingSwap, Family::DegreeOne, Family::TwoByTwoSwap]
        );
        assert!(markov_basis(shape(2, 5)).unwrap().has(Family::Type4Swap));
        let b = markov_basis(shape(4, 3)).unwrap();
        assert_eq!(
            b.families(),
            &[
                Family::CrossingSwap,
                Family::Permutation(2),
                Family::Permutation(3),
                Family::Permutation(4)
            ]
        );
        assert_eq!(
            markov_basis(shape(3, 4)).unwrap_err(),
            Error::UnsupportedShape { states: 3, length: 4 }
        );
    }

    #[test]
    fn random_moves_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (s, t) in [(2, 3), (2, 4), (2, 6), (3, 3), (5, 3)] {
            let b = markov_basis(shape(s, t)).unwrap();
            for _ in 0..500 {
                let mv = b.random_move(&mut rng);
                assert!(is_valid_move(&mv), "{mv}");
            }
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            Family::CrossingSwap,
            Family::DegreeOne,
            Family::TwoByTwoSwap,
            Family::Type4Swap,
            Family::Permutation(3),
        ] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("permutation-x".parse::<Family>().is_err());
    }

    #[test]
    fn rejects_inconsistent_families() {
        assert!(BasisDescriptor::with_families(shape(3, 4), vec![Family::Type4Swap]).is_err());
        assert!(BasisDescriptor::with_families(shape(3, 3), vec![Family::Permutation(4)]).is_err());
    }

    #[test]
    fn move_list_validates() {
        let sh = shape(2, 4);
        let bad = Move::from_digit_entries(sh, &[("1111", 1)]).unwrap();
        assert!(MoveList::new(sh, vec![bad]).is_err());
        let good = Move::from_digit_entries(sh, &[("1121", 1), ("1211", -1)]).unwrap();
        let list = MoveList::new(sh, vec![good, Move::zero(sh)]).unwrap();
        assert_eq!(list.len(), 1);
        let x = PathTable::from_digit_counts(sh, &[("1121", 2)]).unwrap();
        let mut out = Vec::new();
        list.neighbors(&x.units(), &mut out).unwrap();
        let expected = PathTable::from_digit_counts(sh, &[("1121", 1), ("1211", 1)]).unwrap();
        assert_eq!(out, vec![expected.units()]);
    }
}
