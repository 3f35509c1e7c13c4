//! The infinite dihedral group ℤ₂ * ℤ₂ = ⟨ā, b̄ | ā², b̄²⟩ as a quotient of F₂
//! and its conjugation-invariant norm with respect to {ā, b̄}.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binorm::{norm_upper, ConjugateFactor};
use crate::word::{Letter, Rank, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid dihedral letter {ch:?} at position {pos}")]
pub struct DihedralParseError {
    pub ch: char,
    pub pos: usize,
}

/// An alternating word in ā (0) and b̄ (1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct DihedralElement {
    letters: Vec<u8>,
}

impl DihedralElement {
    pub fn identity() -> Self {
        DihedralElement { letters: Vec::new() }
    }

    /// Reduces using ā² = b̄² = 1.
    pub fn from_letters(letters: impl IntoIterator<Item = u8>) -> Self {
        let mut out: Vec<u8> = Vec::new();
        for l in letters {
            assert!(l < 2, "dihedral letters are 0 and 1");
            if out.last() == Some(&l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        DihedralElement { letters: out }
    }

    /// Parses a word in `a`, `b` (case-insensitive, both are involutions).
    pub fn parse(text: &str) -> Result<Self, DihedralParseError> {
        let t = text.trim();
        if t == "1" || t == "e" {
            return Ok(Self::identity());
        }
        let letters = t
            .chars()
            .enumerate()
            .map(|(pos, ch)| match ch {
                'a' | 'A' => Ok(0),
                'b' | 'B' => Ok(1),
                _ => Err(DihedralParseError { ch, pos }),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Ok(Self::from_letters(letters))
    }

    /// The image of a word of F₂ under the canonical quotient.
    pub fn project(g: &Word) -> Self {
        assert_eq!(g.rank().get(), 2, "the quotient is defined on F_2");
        Self::from_letters(g.letters().iter().map(|l| l.generator() as u8))
    }

    /// Every element of length ≤ `max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> Vec<Self> {
        let mut out = vec![Self::identity()];
        for len in 1..=max_len {
            for first in 0..2u8 {
                out.push(DihedralElement { letters: (0..len).map(|i| first ^ (i % 2) as u8).collect() });
            }
        }
        out
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Odd-length elements are the reflections.
    pub fn is_reflection(&self) -> bool {
        self.letters.len() % 2 == 1
    }

    pub fn multiply(&self, other: &Self) -> Self {
        Self::from_letters(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn inverse(&self) -> Self {
        DihedralElement { letters: self.letters.iter().rev().copied().collect() }
    }

    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.multiply(self).multiply(&u.inverse())
    }
}

impl fmt::Display for DihedralElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.letters {
            f.write_str(if l == 0 { "a" } else { "b" })?;
        }
        Ok(())
    }
}

impl From<DihedralElement> for String {
    fn from(x: DihedralElement) -> String {
        x.to_string()
    }
}

impl TryFrom<String> for DihedralElement {
    type Error = DihedralParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

/// All conjugates u s u⁻¹ of ā and b̄ with ℓ(u) ≤ `max_conjugator`.
pub fn generator_conjugates(max_conjugator: usize) -> HashSet<DihedralElement> {
    let gens = [DihedralElement::from_letters([0]), DihedralElement::from_letters([1])];
    DihedralElement::all_up_to(max_conjugator)
        .iter()
        .flat_map(|u| gens.iter().map(move |s| s.conjugate_by(u)))
        .collect()
}

/// Norm by direct search over products of at most two conjugates of
/// generators with conjugators of length ≤ `max_conjugator`, together with
/// the factors found. `None` if no such factorisation exists.
pub fn dihedral_factorization(x: &DihedralElement, max_conjugator: usize) -> Option<Vec<DihedralElement>> {
    if x.is_identity() {
        return Some(Vec::new());
    }
    let conjugates = generator_conjugates(max_conjugator);
    if conjugates.contains(x) {
        return Some(vec![x.clone()]);
    }
    let mut sorted: Vec<&DihedralElement> = conjugates.iter().collect();
    sorted.sort();
    sorted.into_iter().find_map(|c| {
        let rest = c.inverse().multiply(x);
        conjugates.contains(&rest).then(|| vec![c.clone(), rest])
    })
}

/// The conjugation-invariant norm ‖x‖_T for T = {ā, b̄}.
pub fn dihedral_norm(x: &DihedralElement) -> u64 {
    dihedral_factorization(x, x.len() + 1).expect("every element is a product of two reflections").len() as u64
}

/// A preimage in F₂ with the same norm: reflections w s w⁻¹ lift to
/// w̃ s w̃⁻¹, translations to a generator times the lift of a reflection.
pub fn dihedral_lift(x: &DihedralElement) -> Word {
    let rank = Rank::new(2).expect("rank 2");
    let letter = |l: u8| Word::letter(rank, Letter::new(l as usize, false)).expect("within rank");
    if x.is_identity() {
        return Word::identity(rank);
    }
    let ls = x.letters();
    if x.is_reflection() {
        let half = ls.len() / 2;
        let u = Word::from_letters(rank, ls[..half].iter().map(|&l| Letter::new(l as usize, false))).expect("valid");
        return letter(ls[half]).conjugate_by(&u).expect("same rank");
    }
    let rest = DihedralElement { letters: ls[1..].to_vec() };
    letter(ls[0]).multiply(&dihedral_lift(&rest)).expect("same rank")
}

/// An element g of ker π with y = g · x̃, where x̃ lifts π(y), and a
/// certificate that d(y, g) = ‖x̃‖ is at most its length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelApproximation {
    pub y: Word,
    pub kernel_element: Word,
    pub lift: Word,
    pub distance_upper: u64,
    pub certificate: Vec<ConjugateFactor>,
}

pub fn kernel_approximation(y: &Word, norm_budget: usize) -> KernelApproximation {
    let lift = dihedral_lift(&DihedralElement::project(y));
    let kernel_element = y.multiply(&lift.inverse()).expect("same rank");
    debug_assert!(DihedralElement::project(&kernel_element).is_identity());
    let (distance_upper, certificate) = norm_upper(&lift, norm_budget);
    KernelApproximation { y: y.clone(), kernel_element, lift, distance_upper, certificate }
}
