//! One-move neighbourhoods of a table, generated family by family from the
//! paths actually present in it.

use std::collections::HashMap;

use super::templates::{passes, swap_tails, type4_blocks};
use super::PermutationIndex;
use crate::path::Shape;

/// Sorted multiset with `remove` taken out once each and `add` inserted.
fn replace(units: &[u64], remove: &[u64], add: &[u64]) -> Vec<u64> {
    let mut out = units.to_vec();
    for r in remove {
        let pos = out.binary_search(r).expect("removed unit is present");
        out.remove(pos);
    }
    out.extend_from_slice(add);
    out.sort_unstable();
    out
}

/// Distinct values of a sorted multiset with their multiplicities.
fn distinct(units: &[u64]) -> Vec<(u64, usize)> {
    let mut out: Vec<(u64, usize)> = Vec::new();
    for &u in units {
        match out.last_mut() {
            Some((v, c)) if *v == u => *c += 1,
            _ => out.push((u, 1)),
        }
    }
    out
}

pub(super) struct Context<'a> {
    shape: Shape,
    units: &'a [u64],
    values: Vec<(u64, usize)>,
    states: Vec<Vec<u8>>,
}

impl<'a> Context<'a> {
    pub fn new(shape: Shape, units: &'a [u64]) -> Self {
        let values = distinct(units);
        let states = values.iter().map(|(v, _)| shape.decode(*v)).collect();
        Context { shape, units, values, states }
    }

    pub fn crossing(&self, out: &mut Vec<Vec<u64>>) {
        let len = self.shape.length();
        for a in 0..self.values.len() {
            for b in a + 1..self.values.len() {
                for t in 2..len {
                    if self.states[a][t - 1] != self.states[b][t - 1] {
                        continue;
                    }
                    let mut x = self.states[a].clone();
                    let mut y = self.states[b].clone();
                    swap_tails(&mut x, &mut y, t);
                    let (x, y) = (self.shape.encode(&x), self.shape.encode(&y));
                    let (va, vb) = (self.values[a].0, self.values[b].0);
                    if (x == va && y == vb) || (x == vb && y == va) {
                        continue;
                    }
                    out.push(replace(self.units, &[va, vb], &[x, y]));
                }
            }
        }
    }

    pub fn degree_one(&self, classes: &[Vec<u64>], class_of: &HashMap<u64, usize>, out: &mut Vec<Vec<u64>>) {
        for &(v, _) in &self.values {
            if let Some(&c) = class_of.get(&v) {
                for &w in &classes[c] {
                    if w != v {
                        out.push(replace(self.units, &[v], &[w]));
                    }
                }
            }
        }
    }

    /// Both orders of the two tail exchanges, so that a completion created
    /// by one exchange may be consumed by the other.
    pub fn two_by_two(&self, out: &mut Vec<Vec<u64>>) {
        let (s, len) = (self.shape.states(), self.shape.length());
        for t in 1..len - 1 {
            for t2 in t + 1..len {
                for i1 in 1..=s {
                    for i2 in i1 + 1..=s {
                        for j1 in 1..=s {
                            for j2 in 1..=s {
                                if j1 == j2 {
                                    continue;
                                }
                                let first = [(t, i1, j1, i2, j2), (t2, i1, j2, i2, j1)];
                                self.double_swap(first[0], first[1], out);
                                self.double_swap(first[1], first[0], out);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Exchange tails at `a.0` of paths through `a.0:a.1a.2` and
    /// `a.0:a.3a.4`, then likewise for `b` on the result.
    fn double_swap(
        &self,
        a: (usize, usize, usize, usize, usize),
        b: (usize, usize, usize, usize, usize),
        out: &mut Vec<Vec<u64>>,
    ) {
        let shape = self.shape;
        let step = |units: &[u64], vals: &[(u64, usize)], sts: &[Vec<u8>], e: (usize, usize, usize, usize, usize)| {
            let (t, p1, q1, p2, q2) = e;
            let mut res = Vec::new();
            for (x, sx) in vals.iter().zip(sts) {
                if !passes(sx, t, p1, q1) {
                    continue;
                }
                for (y, sy) in vals.iter().zip(sts) {
                    if !passes(sy, t, p2, q2) {
                        continue;
                    }
                    let mut u = sx.clone();
                    let mut v = sy.clone();
                    swap_tails(&mut u, &mut v, t);
                    res.push(replace(units, &[x.0, y.0], &[shape.encode(&u), shape.encode(&v)]));
                }
            }
            res
        };
        for mid in step(self.units, &self.values, &self.states, a) {
            let vals = distinct(&mid);
            let sts: Vec<Vec<u8>> = vals.iter().map(|(v, _)| shape.decode(*v)).collect();
            for y in step(&mid, &vals, &sts, b) {
                if y != self.units {
                    out.push(y);
                }
            }
        }
    }

    pub fn type4(&self, out: &mut Vec<Vec<u64>>) {
        let len = self.shape.length();
        for (p, sp) in self.values.iter().zip(&self.states) {
            for t in 1..=len - 2 {
                let Some((a, b)) = type4_blocks(sp, t) else {
                    continue;
                };
                for (q, sq) in self.values.iter().zip(&self.states) {
                    if p.0 == q.0 && p.1 < 2 {
                        continue;
                    }
                    for t2 in 1..=len - 2 {
                        if t2 == t || !(sq[t2 - 1] == a && sq[t2] == b && sq[t2 + 1] == b) {
                            continue;
                        }
                        let mut f = sp.clone();
                        let mut g = sq.clone();
                        f[t] = b;
                        g[t2] = a;
                        out.push(replace(
                            self.units,
                            &[p.0, q.0],
                            &[self.shape.encode(&f), self.shape.encode(&g)],
                        ));
                    }
                }
            }
        }
    }

    /// Looks up every subset of distinct paths as a permutation's positive
    /// part.
    pub fn permutations(&self, index: &PermutationIndex, out: &mut Vec<Vec<u64>>) {
        let max = index.keys().map(Vec::len).max().unwrap_or(0);
        let vals: Vec<u64> = self.values.iter().map(|v| v.0).collect();
        let mut chosen = Vec::new();
        self.subsets(&vals, 0, max, &mut chosen, index, out);
    }

    fn subsets(
        &self,
        vals: &[u64],
        from: usize,
        max: usize,
        chosen: &mut Vec<u64>,
        index: &PermutationIndex,
        out: &mut Vec<Vec<u64>>,
    ) {
        if chosen.len() >= 2 {
            if let Some(targets) = index.get(chosen.as_slice()) {
                for w2 in targets {
                    out.push(replace(self.units, chosen, w2));
                }
            }
        }
        if chosen.len() == max {
            return;
        }
        for k in from..vals.len() {
            chosen.push(vals[k]);
            self.subsets(vals, k + 1, max, chosen, index, out);
            chosen.pop();
        }
    }
}
