//! Materialising a basis as an explicit, duplicate-free list of moves.

use std::collections::BTreeSet;

use super::templates::{permutation_parts, swap_tails, two_by_two_from_states, type4_blocks, TwoByTwo};
use super::{BasisDescriptor, Family};
use crate::error::{Error, Result};
use crate::moves::Move;
use crate::path::Shape;

/// Default limit on template instantiations visited during enumeration.
pub const DEFAULT_MOVE_CAP: u64 = 5_000_000;

fn check_cap(what: &'static str, requested: u128, cap: u64) -> Result<()> {
    if requested > cap as u128 {
        return Err(Error::CapExceeded { what, requested, limit: cap as u128 });
    }
    Ok(())
}

fn permutations_of(s: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(s: usize, m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in 1..=s {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(s, m, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(s, m, &mut Vec::new(), &mut vec![false; s + 1], &mut out);
    out
}

/// Calls `f(W₁, W₂)` for every instantiation of the `m` by `m` permutation
/// template (ordered index lists and all relevant fills).
pub(crate) fn for_each_permutation(
    shape: Shape,
    m: usize,
    cap: u64,
    mut f: impl FnMut(&[[u8; 3]], &[[u8; 3]]),
) -> Result<()> {
    let s = shape.states();
    let lists = permutations_of(s, m);
    check_cap("permutation index lists", (lists.len() as u128).pow(2), cap)?;
    let free_count = |il: &[usize], jl: &[usize]| (1..=s).filter(|v| il.contains(v) != jl.contains(v)).count();
    let total: u128 = lists
        .iter()
        .flat_map(|il| lists.iter().map(move |jl| (il, jl)))
        .map(|(il, jl)| (s as u128).pow(free_count(il, jl) as u32))
        .sum();
    check_cap("permutation instantiations", total, cap)?;
    let mut fills = vec![1usize; s];
    for il in &lists {
        for jl in &lists {
            let free: Vec<usize> = (1..=s)
                .filter(|v| il.contains(v) != jl.contains(v))
                .collect();
            let combos = s.pow(free.len() as u32);
            for code in 0..combos {
                let mut c = code;
                for &v in &free {
                    fills[v - 1] = c % s + 1;
                    c /= s;
                }
                let (w1, w2) = permutation_parts(shape, il, jl, &fills)?;
                f(&w1, &w2);
            }
            for &v in &free {
                fills[v - 1] = 1;
            }
        }
    }
    Ok(())
}

/// Every distinct nonzero move of the basis, in canonical sign (lowest
/// index positive), sorted.
///
/// `cap` bounds the number of template instantiations visited per family.
pub fn enumerate_moves(basis: &BasisDescriptor, cap: u64) -> Result<Vec<Move>> {
    let shape = basis.shape;
    let (s, len) = (shape.states(), shape.length());
    let cells = shape.cells();
    let mut set: BTreeSet<Move> = BTreeSet::new();
    let mut insert = |mv: Move| {
        if !mv.is_zero() {
            set.insert(mv.canonical());
        }
    };

    for family in basis.families() {
        match *family {
            Family::CrossingSwap => {
                check_cap("crossing swap pairs", (cells as u128).pow(2) * len as u128 / 2, cap)?;
                let mut a = vec![0u8; len];
                let mut b = vec![0u8; len];
                for x in 0..cells {
                    for y in x + 1..cells {
                        for t in 2..len {
                            shape.decode_into(x, &mut a);
                            shape.decode_into(y, &mut b);
                            if a[t - 1] != b[t - 1] {
                                continue;
                            }
                            swap_tails(&mut a, &mut b, t);
                            insert(Move::from_parts(shape, &[x, y], &[shape.encode(&a), shape.encode(&b)])?);
                        }
                    }
                }
            }
            Family::DegreeOne => {
                for class in basis.degree_one_classes() {
                    for (k, &a) in class.iter().enumerate() {
                        for &b in &class[k + 1..] {
                            insert(Move::from_parts(shape, &[a], &[b])?);
                        }
                    }
                }
            }
            Family::TwoByTwoSwap => {
                let free = (s as u128).pow(len as u32 - 2);
                let pairs = ((len - 1) * (len - 2) / 2) as u128;
                let patterns = (s * s * (s - 1) * (s - 1)) as u128;
                check_cap("2 by 2 swap instantiations", pairs * patterns * free.pow(4), cap)?;
                let completions = |t: usize, i: usize, j: usize| -> Vec<Vec<u8>> {
                    shape
                        .all_indices()
                        .map(|x| shape.decode(x))
                        .filter(|p| p[t - 1] as usize == i && p[t] as usize == j)
                        .collect()
                };
                for t in 1..len - 1 {
                    for t2 in t + 1..len {
                        for i1 in 1..=s {
                            for i2 in (1..=s).filter(|&v| v != i1) {
                                for j1 in 1..=s {
                                    for j2 in (1..=s).filter(|&v| v != j1) {
                                        let pattern = TwoByTwo { t, t2, i1, j1, i2, j2 };
                                        let [e1, e2, e3, e4] = pattern.required_edges();
                                        let c1 = completions(e1.0, e1.1, e1.2);
                                        let c2 = completions(e2.0, e2.1, e2.2);
                                        let c3 = completions(e3.0, e3.1, e3.2);
                                        let c4 = completions(e4.0, e4.1, e4.2);
                                        for a in &c1 {
                                            for b in &c2 {
                                                for c in &c3 {
                                                    for d in &c4 {
                                                        let states = [a.clone(), b.clone(), c.clone(), d.clone()];
                                                        let plus: Vec<u64> =
                                                            states.iter().map(|p| shape.encode(p)).collect();
                                                        insert(two_by_two_from_states(shape, pattern, &states, &plus));
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Family::Type4Swap => {
                check_cap("type 4 pairs", (cells as u128).pow(2), cap)?;
                for x in 0..cells {
                    let first = shape.decode(x);
                    for t in 1..=len - 2 {
                        let Some((a, b)) = type4_blocks(&first, t) else {
                            continue;
                        };
                        for y in 0..cells {
                            let second = shape.decode(y);
                            for t2 in (1..=len - 2).filter(|&v| v != t) {
                                if !(second[t2 - 1] == a && second[t2] == b && second[t2 + 1] == b) {
                                    continue;
                                }
                                let mut f = first.clone();
                                let mut g = second.clone();
                                f[t] = b;
                                g[t2] = a;
                                insert(Move::from_parts(shape, &[x, y], &[shape.encode(&f), shape.encode(&g)])?);
                            }
                        }
                    }
                }
            }
            Family::Permutation(m) => {
                let mut err = None;
                for_each_permutation(shape, m, cap, |w1, w2| {
                    let plus: Vec<u64> = w1.iter().map(|p| shape.encode(p)).collect();
                    let minus: Vec<u64> = w2.iter().map(|p| shape.encode(p)).collect();
                    match Move::from_parts(shape, &plus, &minus) {
                        Ok(mv) => insert(mv),
                        Err(e) => err = Some(e),
                    }
                })?;
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}
