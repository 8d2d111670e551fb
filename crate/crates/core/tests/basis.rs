use std::collections::BTreeSet;

use thmc::basis::{enumerate_moves, DEFAULT_MOVE_CAP};
use thmc::fiber::{fibers_of_size, verify_connectivity, DEFAULT_FIBER_CAP};
use thmc::{markov_basis, BasisDescriptor, Family, MoveGenerator, MoveList, Shape};

fn shape(s: usize, t: usize) -> Shape {
    Shape::new(s, t).unwrap()
}

fn neighbor_set(gen: &dyn MoveGenerator, units: &[u64]) -> BTreeSet<Vec<u64>> {
    let mut out = Vec::new();
    gen.neighbors(units, &mut out).unwrap();
    out.into_iter().filter(|y| y != units).collect()
}

/// Neighbours generated from paths in the table agree with applying every
/// enumerated move of the family.
#[test]
fn spliced_neighbours_match_enumerated_moves() {
    let cases = [
        (2, 4, Family::TwoByTwoSwap, 4),
        (2, 5, Family::TwoByTwoSwap, 2),
        (3, 3, Family::TwoByTwoSwap, 3),
        (2, 4, Family::CrossingSwap, 3),
        (3, 3, Family::CrossingSwap, 3),
        (2, 6, Family::Type4Swap, 3),
        (3, 3, Family::Permutation(2), 3),
        (3, 3, Family::Permutation(3), 3),
        (4, 3, Family::Permutation(4), 4),
    ];
    for (s, t, family, max_n) in cases {
        let sh = shape(s, t);
        let spliced = BasisDescriptor::with_families(sh, vec![family]).unwrap();
        let listed = MoveList::new(sh, enumerate_moves(&spliced, DEFAULT_MOVE_CAP).unwrap()).unwrap();
        for n in 1..=max_n {
            for fiber in fibers_of_size(sh, n, DEFAULT_FIBER_CAP).unwrap() {
                for x in fiber.units() {
                    let a = neighbor_set(&spliced, x);
                    let b = neighbor_set(&listed, x);
                    if family == Family::Type4Swap {
                        // Splicing needs both paths present; the listed move
                        // may reach further when a path cancels.
                        assert!(a.is_subset(&b), "{family} {sh} {x:?}");
                    } else {
                        assert_eq!(a, b, "{family} {sh} {x:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn two_state_bases_connect_small_fibers() {
    for (t, max_n) in [(3, 5), (4, 4), (5, 4)] {
        let basis = markov_basis(shape(2, t)).unwrap();
        let report = verify_connectivity(&basis, max_n, 0, DEFAULT_FIBER_CAP).unwrap();
        assert!(report.connected(), "T={t}: {:?}", report.disconnected());
    }
}

#[test]
fn length_three_bases_connect_small_fibers() {
    for (s, max_n) in [(3, 4), (4, 3)] {
        let basis = markov_basis(shape(s, 3)).unwrap();
        let report = verify_connectivity(&basis, max_n, 0, DEFAULT_FIBER_CAP).unwrap();
        assert!(report.connected(), "S={s}: {:?}", report.disconnected());
    }
}

#[test]
fn dropping_a_family_disconnects() {
    let full = markov_basis(shape(3, 3)).unwrap();
    for family in [Family::CrossingSwap, Family::Permutation(2), Family::Permutation(3)] {
        let report = verify_connectivity(&full.without(family), 3, 0, DEFAULT_FIBER_CAP).unwrap();
        assert!(!report.connected(), "{family}");
    }
    let two = markov_basis(shape(2, 5)).unwrap();
    for family in [Family::CrossingSwap, Family::DegreeOne, Family::TwoByTwoSwap, Family::Type4Swap] {
        let report = verify_connectivity(&two.without(family), 4, 0, DEFAULT_FIBER_CAP).unwrap();
        assert!(!report.connected(), "{family}");
    }
}
