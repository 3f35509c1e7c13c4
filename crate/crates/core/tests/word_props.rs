mod common;

use bifree::{count_disjoint, Letter, Word};
use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn reduction_is_idempotent(g in arb_word(3, 20)) {
        let again = Word::from_letters(g.rank(), g.letters().iter().copied()).unwrap();
        prop_assert_eq!(&again, &g);
        prop_assert!(g.letters().windows(2).all(|p| !p[0].cancels(p[1])));
    }

    #[test]
    fn length_bounds(g in arb_word(3, 15), h in arb_word(3, 15)) {
        prop_assert!(g.multiply(&h).unwrap().len() <= g.len() + h.len());
        prop_assert_eq!(g.inverse().len(), g.len());
        prop_assert!(g.multiply(&g.inverse()).unwrap().is_identity());
    }

    #[test]
    fn multiplication_is_associative(g in arb_word(2, 10), h in arb_word(2, 10), k in arb_word(2, 10)) {
        let left = g.multiply(&h).unwrap().multiply(&k).unwrap();
        let right = g.multiply(&h.multiply(&k).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn cyclic_reduction_recovers_word(g in arb_word(3, 20)) {
        let (cyclic, u) = g.cyclic_reduce();
        prop_assert!(cyclic.word().is_cyclically_reduced());
        prop_assert_eq!(cyclic.word().conjugate_by(&u).unwrap(), g);
    }

    #[test]
    fn conjugacy_is_invariant(g in arb_word(2, 10), u in arb_word(2, 8), v in arb_word(2, 8)) {
        let gu = g.conjugate_by(&u).unwrap();
        let gv = g.conjugate_by(&v).unwrap();
        prop_assert!(g.is_conjugate_to(&g).unwrap());
        prop_assert!(gu.is_conjugate_to(&g).unwrap() && g.is_conjugate_to(&gu).unwrap());
        prop_assert!(gu.is_conjugate_to(&gv).unwrap());
        prop_assert_eq!(gu.cyclic_reduce().0, g.cyclic_reduce().0);
    }

    #[test]
    fn primitive_root_of_powers(g in arb_cyclic(2, 8), k in 1i64..5) {
        let (root, e) = g.primitive_root().unwrap();
        let (root_k, e_k) = g.pow(k).primitive_root().unwrap();
        prop_assert_eq!(&root_k, &root);
        prop_assert_eq!(e_k, e * k as usize);
        prop_assert_eq!(root.pow(e as i64), g);
    }
}

#[test]
fn conjugacy_is_an_equivalence_on_a_sample() {
    let mut r = rng(11);
    let n = rank(2);
    let base: Vec<Word> = (0..6).map(|i| random_reduced(&mut r, n, 2 + i % 3)).collect();
    let mut sample = Vec::new();
    for b in &base {
        for _ in 0..4 {
            let u = random_reduced(&mut r, n, 3);
            sample.push(b.conjugate_by(&u).unwrap());
        }
    }
    for a in &sample {
        for b in &sample {
            let ab = a.is_conjugate_to(b).unwrap();
            assert_eq!(ab, b.is_conjugate_to(a).unwrap());
            if ab {
                for c in &sample {
                    if b.is_conjugate_to(c).unwrap() {
                        assert!(a.is_conjugate_to(c).unwrap());
                    }
                }
            }
        }
    }
}

/// Greedy counting agrees with the subset-maximum for every rank-2 pattern
/// of length ≤ 4 and every reduced word of length ≤ 12.
#[test]
fn count_disjoint_matches_brute_force_exhaustively() {
    let n = rank(2);
    let patterns: Vec<Word> = ball(n, 4).into_iter().filter(|p| !p.is_identity()).collect();
    let texts = ball(n, 12);
    let mut checked = 0usize;
    for p in &patterns {
        let pl: Vec<Letter> = p.letters().to_vec();
        for g in &texts {
            let fast = count_disjoint(p, g).unwrap();
            if g.len() < p.len() {
                assert_eq!(fast, 0);
                continue;
            }
            assert_eq!(fast, brute_count_disjoint(&pl, g.letters()), "pattern {p} text {g}");
            checked += 1;
        }
    }
    assert!(checked > 10_000_000);
}
