//! Brute-force oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use bifree::{Letter, Rank, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rank(n: usize) -> Rank {
    Rank::new(n).unwrap()
}

pub fn w(n: usize, s: &str) -> Word {
    Word::parse(rank(n), s).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform reduced word of exact length `len`.
pub fn random_reduced(r: &mut impl Rng, n: Rank, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_code(r.random_range(0..2 * n.get()));
        if letters.last().is_some_and(|p| p.cancels(l)) {
            continue;
        }
        letters.push(l);
    }
    Word::from_letters(n, letters).unwrap()
}

/// Nonempty cyclically reduced word of length exactly `len` (`len` ≥ 1).
pub fn random_cyclically_reduced(r: &mut impl Rng, n: Rank, len: usize) -> Word {
    loop {
        let g = random_reduced(r, n, len);
        if g.is_cyclically_reduced() {
            return g;
        }
    }
}

/// All reduced words of length ≤ `max_len`, shortest first.
pub fn ball(n: Rank, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity(n)];
    let mut layer = vec![Word::identity(n)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for g in &layer {
            for l in n.letters() {
                if g.last().is_some_and(|p| p.cancels(l)) {
                    continue;
                }
                next.push(g.multiply(&Word::letter(n, l).unwrap()).unwrap());
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Maximum number of pairwise disjoint occurrences, by exhausting subsets
/// of occurrence positions.
pub fn brute_count_disjoint(pattern: &[Letter], text: &[Letter]) -> usize {
    let m = pattern.len();
    if m == 0 || m > text.len() {
        return 0;
    }
    let starts: Vec<usize> = (0..=text.len() - m).filter(|&i| text[i..i + m] == *pattern).collect();
    fn best(starts: &[usize], m: usize, free_from: usize) -> usize {
        match starts.split_first() {
            None => 0,
            Some((&s, rest)) => {
                let skip = best(rest, m, free_from);
                if s >= free_from {
                    skip.max(1 + best(rest, m, s + m))
                } else {
                    skip
                }
            }
        }
    }
    best(&starts, m, 0)
}

/// Products of conjugates of generators^{±1} with bounded conjugators.
pub struct FactorOracle {
    pub rank: Rank,
    pub singles: Vec<Word>,
    single_set: HashSet<Word>,
    pairs: HashSet<Word>,
}

impl FactorOracle {
    pub fn new(n: Rank, max_conjugator: usize) -> Self {
        let mut single_set = HashSet::new();
        for u in ball(n, max_conjugator) {
            for l in n.letters() {
                single_set.insert(Word::letter(n, l).unwrap().conjugate_by(&u).unwrap());
            }
        }
        let mut singles: Vec<Word> = single_set.iter().cloned().collect();
        singles.sort();
        let mut pairs = HashSet::new();
        for a in &singles {
            for b in &singles {
                pairs.insert(a.multiply(b).unwrap());
            }
        }
        FactorOracle { rank: n, singles, single_set, pairs }
    }

    /// Whether g is a product of exactly k factors (k ≤ 4). Since a factor
    /// and its inverse are both available, "exactly k" implies "at most k"
    /// only up to parity; callers ask for each k separately.
    pub fn is_product_of(&self, g: &Word, k: usize) -> bool {
        match k {
            0 => g.is_identity(),
            1 => self.single_set.contains(g),
            2 => self.pairs.contains(g),
            3 => self.singles.iter().any(|s| self.pairs.contains(&s.inverse().multiply(g).unwrap())),
            4 => self.singles.iter().any(|s| {
                let rest = s.inverse().multiply(g).unwrap();
                self.singles.iter().any(|t| self.pairs.contains(&t.inverse().multiply(&rest).unwrap()))
            }),
            _ => panic!("the oracle only reaches four factors"),
        }
    }

    /// Least k ≤ `limit` with g a product of k factors.
    pub fn norm_up_to(&self, g: &Word, limit: usize) -> Option<usize> {
        (0..=limit.min(4)).find(|&k| self.is_product_of(g, k))
    }
}

/// Reduced products of at most `factors` generators^{±1}, restricted to
/// length ≤ `max_len`.
pub fn naive_subgroup_ball(gens: &[Word], factors: usize, max_len: usize) -> BTreeSet<Word> {
    let n = gens[0].rank();
    let mut pool: Vec<Word> = gens.iter().flat_map(|g| [g.clone(), g.inverse()]).filter(|g| !g.is_identity()).collect();
    pool.sort();
    pool.dedup();
    let mut seen: HashSet<Word> = HashSet::from([Word::identity(n)]);
    let mut frontier = vec![Word::identity(n)];
    for _ in 0..factors {
        let mut next = Vec::new();
        for g in &frontier {
            for p in &pool {
                let h = g.multiply(p).unwrap();
                if seen.insert(h.clone()) {
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().filter(|g| g.len() <= max_len).collect()
}

pub fn arb_word(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(0..2 * n, 0..=max_len)
        .prop_map(move |codes| Word::from_letters(rank(n), codes.into_iter().map(Letter::from_code)).unwrap())
}

pub fn arb_cyclic(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
    arb_word(n, max_len).prop_map(|g| g.cyclic_core()).prop_filter("nontrivial", |g| !g.is_identity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Isomorphism,
    NonInjective,
    FiniteIndex(usize),
    InfiniteIndex,
}

/// Homomorphisms F_m → F_n with known classification.
pub fn labelled_corpus() -> Vec<(&'static str, usize, usize, Vec<&'static str>, Label)> {
    use Label::*;
    vec![
        ("identity", 2, 2, vec!["a", "b"], Isomorphism),
        ("swap", 2, 2, vec!["b", "a"], Isomorphism),
        ("invert", 2, 2, vec!["A", "b"], Isomorphism),
        ("transvection", 2, 2, vec!["ab", "b"], Isomorphism),
        ("right transvection", 2, 2, vec!["a", "ba"], Isomorphism),
        ("nielsen composite", 2, 2, vec!["ab", "aab"], Isomorphism),
        ("inner by b", 2, 2, vec!["baB", "b"], Isomorphism),
        ("rank 3 triangular", 3, 3, vec!["a", "ab", "abc"], Isomorphism),
        ("rank 3 cycle", 3, 3, vec!["c", "a", "b"], Isomorphism),
        ("rank 1 inversion", 1, 1, vec!["A"], Isomorphism),
        ("repeated image", 2, 2, vec!["a", "a"], NonInjective),
        ("inverse pair", 2, 2, vec!["ab", "BA"], NonInjective),
        ("redundant product", 3, 2, vec!["a", "b", "ab"], NonInjective),
        ("onto rank 1", 2, 1, vec!["a", "aa"], NonInjective),
        ("trivial image", 2, 2, vec!["a", "1"], NonInjective),
        ("commuting powers", 2, 2, vec!["aa", "aaa"], NonInjective),
        ("even a-exponent", 3, 2, vec!["aa", "b", "abA"], FiniteIndex(2)),
        ("even length", 3, 2, vec!["aa", "ab", "aB"], FiniteIndex(2)),
        ("even b-exponent", 3, 2, vec!["a", "bb", "baB"], FiniteIndex(2)),
        ("a-exponent mod 3", 4, 2, vec!["aaa", "b", "abA", "aabAA"], FiniteIndex(3)),
        ("rank 3 target, index 2", 5, 3, vec!["aa", "b", "c", "abA", "acA"], FiniteIndex(2)),
        ("powers", 2, 2, vec!["aa", "bb"], InfiniteIndex),
        ("square and generator", 2, 2, vec!["aa", "b"], InfiniteIndex),
        ("killer example", 3, 2, vec!["abAB", "bbbb", "aaa"], InfiniteIndex),
        ("cyclic", 1, 2, vec!["ab"], InfiniteIndex),
        ("inclusion", 2, 3, vec!["a", "b"], InfiniteIndex),
        ("commutators", 2, 2, vec!["abAB", "aBAb"], InfiniteIndex),
    ]
}
