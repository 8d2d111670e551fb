//! Fully specified instances of the basis move families.
//!
//! All time indices here are 1-based, matching the usual `t:ij` notation
//! for the edge from `(i, t)` to `(j, t+1)`.

use crate::error::{Error, Result};
use crate::moves::Move;
use crate::path::{Shape, StatePath};

/// Whether `states` (1-based) uses the edge `t:ij`.
#[inline]
pub(crate) fn passes(states: &[u8], t: usize, i: usize, j: usize) -> bool {
    states[t - 1] as usize == i && states[t] as usize == j
}

/// Exchanges everything after time `t` between two state sequences.
#[inline]
pub(crate) fn swap_tails(a: &mut [u8], b: &mut [u8], t: usize) {
    a[t..].swap_with_slice(&mut b[t..]);
}

fn check_time(t: usize, lo: usize, hi: usize) -> Result<()> {
    if (lo..=hi).contains(&t) {
        Ok(())
    } else {
        Err(Error::TimeOutOfRange { t, lo, hi })
    }
}

fn check_state(shape: Shape, s: usize) -> Result<()> {
    if (1..=shape.states()).contains(&s) {
        Ok(())
    } else {
        Err(Error::InvalidTemplate(format!("state {s} outside 1..={}", shape.states())))
    }
}

/// Crossing path swap: `+{ω, ω′} − {ω̃, ω̃′}` where the tilde paths exchange
/// their tails after the common node at time `t`.
///
/// Returns the zero move when the swap reproduces the same pair.
pub fn crossing_swap(a: &StatePath, b: &StatePath, t: usize) -> Result<Move> {
    let shape = a.shape();
    shape.check_same(&b.shape())?;
    check_time(t, 1, shape.length())?;
    if a.state_at(t) != b.state_at(t) {
        return Err(Error::NotCrossing { t });
    }
    let mut sa = a.states().to_vec();
    let mut sb = b.states().to_vec();
    swap_tails(&mut sa, &mut sb, t);
    Move::from_parts(
        shape,
        &[a.index(), b.index()],
        &[shape.encode(&sa), shape.encode(&sb)],
    )
}

/// Edge pattern of a 2 by 2 swap
/// `{t:i₁j₁, t:i₂j₂} ↔ {t′:i₁j₂, t′:i₂j₁}`, all 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoByTwo {
    pub t: usize,
    pub t2: usize,
    pub i1: usize,
    pub j1: usize,
    pub i2: usize,
    pub j2: usize,
}

impl TwoByTwo {
    pub fn validate(&self, shape: Shape) -> Result<()> {
        for s in [self.i1, self.j1, self.i2, self.j2] {
            check_state(shape, s)?;
        }
        if self.i1 == self.i2 || self.j1 == self.j2 {
            return Err(Error::InvalidTemplate(
                "2 by 2 swap needs i1 != i2 and j1 != j2".into(),
            ));
        }
        check_time(self.t, 1, shape.length() - 1)?;
        check_time(self.t2, self.t + 1, shape.length() - 1)
    }

    /// The edge `(time, from, to)` each of the four completions must use.
    pub fn required_edges(&self) -> [(usize, usize, usize); 4] {
        [
            (self.t, self.i1, self.j1),
            (self.t, self.i2, self.j2),
            (self.t2, self.i1, self.j2),
            (self.t2, self.i2, self.j1),
        ]
    }
}

/// Builds the 2 by 2 swap move `+{ω₁..ω₄} − {ω̃₁..ω̃₄}` from four completions.
///
/// `ω₁, ω₂` pass `t:i₁j₁, t:i₂j₂` and exchange their tails after `t`;
/// `ω₃, ω₄` pass `t′:i₁j₂, t′:i₂j₁` and exchange their tails after `t′`.
/// Completions need not be distinct; coinciding terms cancel, which is how
/// the degree 2 and 3 members of the family arise.
pub fn two_by_two_swap(pattern: TwoByTwo, completions: [&StatePath; 4]) -> Result<Move> {
    let shape = completions[0].shape();
    for c in &completions[1..] {
        shape.check_same(&c.shape())?;
    }
    pattern.validate(shape)?;
    for (k, ((t, i, j), c)) in pattern.required_edges().iter().zip(completions).enumerate() {
        if !passes(c.states(), *t, *i, *j) {
            return Err(Error::InvalidTemplate(format!(
                "completion {} ({c}) does not pass {t}:{i}{j}",
                k + 1
            )));
        }
    }
    let states: Vec<Vec<u8>> = completions.iter().map(|c| c.states().to_vec()).collect();
    let plus: Vec<u64> = completions.iter().map(|c| c.index()).collect();
    Ok(two_by_two_from_states(shape, pattern, &states, &plus))
}

/// Unchecked core of [`two_by_two_swap`].
pub(crate) fn two_by_two_from_states(
    shape: Shape,
    pattern: TwoByTwo,
    states: &[Vec<u8>],
    plus: &[u64],
) -> Move {
    let (mut a, mut b) = (states[0].clone(), states[1].clone());
    swap_tails(&mut a, &mut b, pattern.t);
    let (mut c, mut d) = (states[2].clone(), states[3].clone());
    swap_tails(&mut c, &mut d, pattern.t2);
    let minus = [
        shape.encode(&a),
        shape.encode(&b),
        shape.encode(&c),
        shape.encode(&d),
    ];
    Move::from_parts(shape, plus, &minus).expect("indices come from valid paths")
}

/// Block orientation of a two-state type 4 move: `t:aab ↔ t′:abb`.
pub(crate) fn type4_blocks(first: &[u8], t: usize) -> Option<(u8, u8)> {
    let (x, y, z) = (first[t - 1], first[t], first[t + 1]);
    (x == y && y != z).then_some((x, z))
}

/// Two-state type 4 move: swap the block `t:aab` of `first` with the
/// block `t′:abb` of `second` (`(a, b)` is `(1, 2)` or `(2, 1)`).
///
/// `t′ = t ± 1` gives the collapsed case with a doubled middle transition.
pub fn type4_move(t: usize, t2: usize, first: &StatePath, second: &StatePath) -> Result<Move> {
    let shape = first.shape();
    shape.check_same(&second.shape())?;
    if shape.states() != 2 {
        return Err(Error::InvalidTemplate("type 4 moves are defined for S = 2 only".into()));
    }
    let hi = shape.length() - 2;
    check_time(t, 1, hi)?;
    check_time(t2, 1, hi)?;
    if t == t2 {
        return Err(Error::InvalidTemplate("type 4 move needs t != t'".into()));
    }
    let (a, b) = type4_blocks(first.states(), t).ok_or_else(|| {
        Error::InvalidTemplate(format!("{first} has no block aab at time {t}"))
    })?;
    let s = second.states();
    if !(s[t2 - 1] == a && s[t2] == b && s[t2 + 1] == b) {
        return Err(Error::InvalidTemplate(format!(
            "{second} has no block {a}{b}{b} at time {t2}"
        )));
    }
    let mut f = first.states().to_vec();
    let mut g = s.to_vec();
    f[t] = b;
    g[t2] = a;
    Move::from_parts(
        shape,
        &[first.index(), second.index()],
        &[shape.encode(&f), shape.encode(&g)],
    )
}

/// Paths `W₁` (positive) and `W₂` (negative) of the `m` by `m` permutation
/// `Z(i₁..i_m; j₁..j_m)` for `T = 3`: first-step edges `i_l → j_l`,
/// second-step edges `i_l → j_{l−1}` (cyclically, `i₁ → j_m`).
///
/// `fills[j − 1]` supplies the free state for middle state `j`: the
/// initial state when `j ∈ I∖J`, the final state when `j ∈ J∖I`.
pub(crate) fn permutation_parts(
    shape: Shape,
    i_list: &[usize],
    j_list: &[usize],
    fills: &[usize],
) -> Result<(Vec<[u8; 3]>, Vec<[u8; 3]>)> {
    let s = shape.states();
    if shape.length() != 3 {
        return Err(Error::InvalidTemplate("m by m permutations need T = 3".into()));
    }
    let m = i_list.len();
    if m < 2 || m > s || j_list.len() != m {
        return Err(Error::InvalidTemplate(format!(
            "index lists must have equal length in 2..={s}"
        )));
    }
    if fills.len() != s {
        return Err(Error::InvalidTemplate(format!("fills must have length S = {s}")));
    }
    for &v in i_list.iter().chain(j_list).chain(fills) {
        check_state(shape, v)?;
    }
    let distinct = |l: &[usize]| {
        let mut v = l.to_vec();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    };
    if !distinct(i_list) || !distinct(j_list) {
        return Err(Error::InvalidTemplate("index lists must be duplicate-free".into()));
    }

    // Position of each state in the two lists (0 = absent).
    let mut pos_i = vec![0usize; s + 1];
    let mut pos_j = vec![0usize; s + 1];
    for l in 0..m {
        pos_i[i_list[l]] = l + 1;
        pos_j[j_list[l]] = l + 1;
    }
    let prev = |l: usize| (l + m - 1) % m; // σ(l) = l − 1, σ(1) = m
    let next = |l: usize| (l + 1) % m;

    let mut w1 = Vec::new();
    let mut w2 = Vec::new();
    for j in 1..=s {
        let (in_i, in_j) = (pos_i[j], pos_j[j]);
        if in_i == 0 && in_j == 0 {
            continue;
        }
        // First-step sources: i(j) from i_l → j_l, i'(j) from i_{l+1} → j_l.
        let (src, src_alt) = if in_j > 0 {
            let l = in_j - 1;
            (i_list[l], i_list[next(l)])
        } else {
            (fills[j - 1], fills[j - 1])
        };
        // Second-step targets: k(j) from j = i_l → j_{σ(l)}, k'(j) from i_l → j_l.
        let (dst, dst_alt) = if in_i > 0 {
            let l = in_i - 1;
            (j_list[prev(l)], j_list[l])
        } else {
            (fills[j - 1], fills[j - 1])
        };
        w1.push([src as u8, j as u8, dst as u8]);
        w2.push([src_alt as u8, j as u8, dst_alt as u8]);
    }
    Ok((w1, w2))
}

/// The `m` by `m` permutation move `+W₁ − W₂` for `T = 3`.
pub fn m_permutation(shape: Shape, i_list: &[usize], j_list: &[usize], fills: &[usize]) -> Result<Move> {
    let (w1, w2) = permutation_parts(shape, i_list, j_list, fills)?;
    let enc = |w: &[[u8; 3]]| w.iter().map(|p| shape.encode(p)).collect::<Vec<_>>();
    Move::from_parts(shape, &enc(&w1), &enc(&w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::is_valid_move;

    fn p(shape: Shape, d: &str) -> StatePath {
        StatePath::parse_digits(shape, d).unwrap()
    }

    #[test]
    fn crossing_swap_examples() {
        let sh = Shape::new(2, 3).unwrap();
        let mv = crossing_swap(&p(sh, "112"), &p(sh, "211"), 2).unwrap();
        assert_eq!(
            mv,
            Move::from_digit_entries(sh, &[("112", 1), ("211", 1), ("111", -1), ("212", -1)]).unwrap()
        );
        assert!(crossing_swap(&p(sh, "121"), &p(sh, "121"), 2).unwrap().is_zero());
        assert!(matches!(
            crossing_swap(&p(sh, "112"), &p(sh, "221"), 2),
            Err(Error::NotCrossing { t: 2 })
        ));
    }

    #[test]
    fn two_by_two_with_cancelling_completions() {
        let sh = Shape::new(2, 3).unwrap();
        let pattern = TwoByTwo { t: 1, t2: 2, i1: 1, j1: 1, i2: 2, j2: 2 };
        let c = [p(sh, "111"), p(sh, "222"), p(sh, "112"), p(sh, "221")];
        let mv = two_by_two_swap(pattern, [&c[0], &c[1], &c[2], &c[3]]).unwrap();
        assert_eq!(
            mv,
            Move::from_digit_entries(sh, &[("112", 1), ("221", 1), ("122", -1), ("211", -1)]).unwrap()
        );
        assert!(mv.degree() <= 4);
        assert!(is_valid_move(&mv));
    }

    #[test]
    fn two_by_two_rejects_bad_input() {
        let sh = Shape::new(2, 3).unwrap();
        let c = [p(sh, "111"), p(sh, "222"), p(sh, "112"), p(sh, "221")];
        let refs = [&c[0], &c[1], &c[2], &c[3]];
        let same_i = TwoByTwo { t: 1, t2: 2, i1: 1, j1: 1, i2: 1, j2: 2 };
        assert!(two_by_two_swap(same_i, refs).is_err());
        let backwards = TwoByTwo { t: 2, t2: 1, i1: 1, j1: 1, i2: 2, j2: 2 };
        assert!(two_by_two_swap(backwards, refs).is_err());
        let pattern = TwoByTwo { t: 1, t2: 2, i1: 1, j1: 1, i2: 2, j2: 2 };
        let wrong = [&c[1], &c[0], &c[2], &c[3]];
        assert!(matches!(two_by_two_swap(pattern, wrong), Err(Error::InvalidTemplate(_))));
    }

    #[test]
    fn type4_examples() {
        let sh = Shape::new(2, 5).unwrap();
        let mv = type4_move(1, 3, &p(sh, "11222"), &p(sh, "11122")).unwrap();
        assert_eq!(
            mv,
            Move::from_digit_entries(sh, &[("11222", 1), ("11122", 1), ("12222", -1), ("11112", -1)])
                .unwrap()
        );
        assert!(is_valid_move(&mv));
        assert!(type4_move(1, 1, &p(sh, "11222"), &p(sh, "11222")).is_err());
        assert!(type4_move(1, 4, &p(sh, "11222"), &p(sh, "11122")).is_err());
        assert!(type4_move(2, 3, &p(sh, "11222"), &p(sh, "11122")).is_err());
        let s3 = Shape::new(3, 5).unwrap();
        assert!(type4_move(1, 3, &p(s3, "11222"), &p(s3, "11122")).is_err());
    }

    #[test]
    fn collapsed_type4_has_doubled_middle_edge() {
        let sh = Shape::new(2, 4).unwrap();
        // x passes 1:112, y passes 2:122
        let mv = type4_move(1, 2, &p(sh, "1121"), &p(sh, "2122")).unwrap();
        assert!(is_valid_move(&mv));
        let z = mv.edge_deltas();
        let e = |t: usize, i: usize, j: usize| z[sh.edge_slot(t - 1, i - 1, j - 1)];
        assert_eq!((e(1, 1, 1), e(2, 1, 2), e(3, 2, 2), e(3, 1, 2)), (1, 2, 1, -1));
        // the negation matches the listed edge values exactly
        let neg = mv.negated().edge_deltas();
        let n = |t: usize, i: usize, j: usize| neg[sh.edge_slot(t - 1, i - 1, j - 1)];
        assert_eq!(n(1, 1, 1), -1);
        assert_eq!(n(2, 1, 2), -2);
        assert_eq!((n(1, 1, 2), n(2, 2, 2), n(2, 1, 1)), (1, 1, 1));
    }

    #[test]
    fn permutation_two_by_two() {
        let sh = Shape::new(2, 3).unwrap();
        let mv = m_permutation(sh, &[1, 2], &[1, 2], &[1, 1]).unwrap();
        assert_eq!(
            mv,
            Move::from_digit_entries(sh, &[("112", 1), ("221", 1), ("211", -1), ("122", -1)]).unwrap()
        );
    }

    #[test]
    fn permutation_figure_instance() {
        let sh = Shape::new(6, 3).unwrap();
        let (w1, w2) = permutation_parts(sh, &[1, 2, 4, 5], &[1, 3, 5, 6], &[1, 1, 1, 1, 1, 1]).unwrap();
        assert!(w1.contains(&[1, 1, 6]));
        assert!(w2.contains(&[2, 1, 1]));
        // j = 2 ∈ I∖J: k(2) = 1 (positive), k'(2) = 3 (negative)
        assert!(w1.contains(&[1, 2, 1]) && w2.contains(&[1, 2, 3]));
        // j = 3 ∈ J∖I: i(3) = 2, i'(3) = 4
        assert!(w1.contains(&[2, 3, 1]) && w2.contains(&[4, 3, 1]));
        let mv = m_permutation(sh, &[1, 2, 4, 5], &[1, 3, 5, 6], &[1, 1, 1, 1, 1, 1]).unwrap();
        assert!(is_valid_move(&mv));
        let nonzero = mv.edge_deltas().iter().filter(|v| **v != 0).count();
        assert_eq!(nonzero, 16);
    }

    #[test]
    fn permutation_rejects_malformed_lists() {
        let sh = Shape::new(3, 3).unwrap();
        assert!(m_permutation(sh, &[1, 1], &[1, 2], &[1, 1, 1]).is_err());
        assert!(m_permutation(sh, &[1], &[1], &[1, 1, 1]).is_err());
        assert!(m_permutation(sh, &[1, 2], &[1, 2, 3], &[1, 1, 1]).is_err());
        assert!(m_permutation(sh, &[1, 2], &[1, 2], &[1, 1]).is_err());
        let s4 = Shape::new(3, 4).unwrap();
        assert!(m_permutation(s4, &[1, 2], &[1, 2], &[1, 1, 1]).is_err());
    }
}
