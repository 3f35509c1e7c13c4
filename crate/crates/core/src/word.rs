//! Reduced words in a free group of finite rank.
//!
//! Every [`Word`] is stored in reduced form; there is no way to construct an
//! unreduced one. Letters are written `a b c ...` for the generators and
//! `A B C ...` for their inverses, so `AbaaB` is a⁻¹ba²b⁻¹.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest rank that the single-character text syntax can address.
pub const MAX_TEXT_RANK: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("generator index {index} is out of range for rank {rank}")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("invalid character {ch:?} at position {pos}")]
    Parse { ch: char, pos: usize },
    #[error("the pattern of a counting function must be a nontrivial word")]
    EmptyPattern,
    #[error("the identity has no primitive root")]
    IdentityRoot,
}

/// Number of standard generators of the free group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Rank(usize);

impl Rank {
    pub fn new(n: usize) -> Result<Self, WordError> {
        if n == 0 {
            Err(WordError::ZeroRank)
        } else {
            Ok(Rank(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// All letters of the alphabet in the fixed order x₁ < x₁⁻¹ < x₂ < ...
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        (0..2 * self.0).map(|c| Letter(c as u32))
    }

    fn check(self, other: Rank) -> Result<(), WordError> {
        if self == other {
            Ok(())
        } else {
            Err(WordError::RankMismatch { left: self.0, right: other.0 })
        }
    }
}

impl TryFrom<usize> for Rank {
    type Error = WordError;
    fn try_from(n: usize) -> Result<Self, WordError> {
        Rank::new(n)
    }
}

impl From<Rank> for usize {
    fn from(r: Rank) -> usize {
        r.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A generator or its inverse. The code `2 * generator + inverse` doubles as
/// the fixed letter order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((2 * generator + inverse as usize) as u32)
    }

    pub fn from_code(code: usize) -> Self {
        Letter(code as u32)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Zero-based generator index.
    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn sign(self) -> i64 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.0 ^ 1 == other.0
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'a'..='z' => Some(Letter::new(ch as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Letter::new(ch as usize - 'A' as usize, true)),
            _ => None,
        }
    }

    /// Text form; generators beyond `z` are written `x27`, `X27`, ...
    pub fn to_text(self) -> String {
        let g = self.generator();
        if g < MAX_TEXT_RANK {
            let base = if self.is_inverse() { b'A' } else { b'a' };
            ((base + g as u8) as char).to_string()
        } else if self.is_inverse() {
            format!("X{}", g + 1)
        } else {
            format!("x{}", g + 1)
        }
    }
}

impl Serialize for Letter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Letter::from_char), chars.next()) {
            (Some(l), None) => Ok(l),
            _ => Err(serde::de::Error::custom(format!("bad letter {s:?}"))),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A reduced word in F_n.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: Rank,
    letters: Vec<Letter>,
}

/// Appends `next` to a reduced buffer, cancelling against its tail.
fn push_reduced(buf: &mut Vec<Letter>, next: Letter) {
    if buf.last().is_some_and(|&l| l.cancels(next)) {
        buf.pop();
    } else {
        buf.push(next);
    }
}

impl Word {
    pub fn identity(rank: Rank) -> Self {
        Word { rank, letters: Vec::new() }
    }

    /// The generator x_{index+1}.
    pub fn generator(rank: Rank, index: usize) -> Result<Self, WordError> {
        Word::from_letters(rank, [Letter::new(index, false)])
    }

    pub fn letter(rank: Rank, letter: Letter) -> Result<Self, WordError> {
        Word::from_letters(rank, [letter])
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters(
        rank: Rank,
        letters: impl IntoIterator<Item = Letter>,
    ) -> Result<Self, WordError> {
        let mut buf = Vec::new();
        for l in letters {
            if l.generator() >= rank.get() {
                return Err(WordError::LetterOutOfRange { index: l.generator(), rank: rank.get() });
            }
            push_reduced(&mut buf, l);
        }
        Ok(Word { rank, letters: buf })
    }

    /// Caller guarantees that `letters` is reduced and within rank.
    pub(crate) fn from_reduced_unchecked(rank: Rank, letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|p| !p[0].cancels(p[1])));
        Word { rank, letters }
    }

    /// Parses the text syntax. `""`, `"1"` and `"e"` all denote the identity.
    pub fn parse(rank: Rank, text: &str) -> Result<Self, WordError> {
        let t = text.trim();
        if t.is_empty() || t == "1" || t == "e" {
            return Ok(Word::identity(rank));
        }
        let mut letters = Vec::with_capacity(t.len());
        for (pos, ch) in t.chars().enumerate() {
            if ch.is_whitespace() || ch == '.' || ch == '*' {
                continue;
            }
            letters.push(Letter::from_char(ch).ok_or(WordError::Parse { ch, pos })?);
        }
        Word::from_letters(rank, letters)
    }

    /// Smallest rank that can hold every letter of `text`, or `None` when the
    /// text names no generator.
    pub fn infer_rank(text: &str) -> Option<usize> {
        text.chars().filter_map(Letter::from_char).map(|l| l.generator() + 1).max()
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Length of the reduced word, ℓ(g).
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn multiply(&self, other: &Word) -> Result<Word, WordError> {
        self.rank.check(other.rank)?;
        let mut buf = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut buf, l);
        }
        Ok(Word { rank: self.rank, letters: buf })
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// g^k for any integer k.
    pub fn pow(&self, k: i64) -> Word {
        if k == 0 || self.is_identity() {
            return Word::identity(self.rank);
        }
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let k = k.unsigned_abs() as usize;
        let (start, end) = base.core_bounds();
        let conj = &base.letters[..start];
        let core = &base.letters[start..end];
        let mut letters = Vec::with_capacity(2 * conj.len() + k * core.len());
        letters.extend_from_slice(conj);
        for _ in 0..k {
            letters.extend_from_slice(core);
        }
        letters.extend(conj.iter().rev().map(|l| l.inverse()));
        Word::from_reduced_unchecked(self.rank, letters)
    }

    /// u·g·u⁻¹.
    pub fn conjugate_by(&self, u: &Word) -> Result<Word, WordError> {
        u.multiply(self)?.multiply(&u.inverse())
    }

    /// Exponent sum of every generator (the abelianization image).
    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut sums = vec![0; self.rank.get()];
        for l in &self.letters {
            sums[l.generator()] += l.sign();
        }
        sums
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || !f.cancels(l),
            _ => true,
        }
    }

    /// Range `start..end` of the cyclically reduced core; the prefix
    /// `letters[..start]` is the conjugator.
    fn core_bounds(&self) -> (usize, usize) {
        let (mut i, mut j) = (0, self.letters.len());
        while j - i >= 2 && self.letters[i].cancels(self.letters[j - 1]) {
            i += 1;
            j -= 1;
        }
        (i, j)
    }

    /// Returns the conjugacy class representative together with a conjugator
    /// `u` such that `self = u · core · u⁻¹`.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let (start, end) = self.core_bounds();
        let core = &self.letters[start..end];
        let shift = least_rotation(core);
        let mut canonical = Vec::with_capacity(core.len());
        canonical.extend_from_slice(&core[shift..]);
        canonical.extend_from_slice(&core[..shift]);
        let prefix = Word::from_reduced_unchecked(self.rank, self.letters[..start].to_vec());
        // core = P·Q with canonical = Q·P; core = P·canonical·P⁻¹ = Q⁻¹·canonical·Q.
        let rotation = if shift <= core.len() - shift {
            Word::from_reduced_unchecked(self.rank, core[..shift].to_vec())
        } else {
            Word::from_reduced_unchecked(self.rank, core[shift..].to_vec()).inverse()
        };
        let conjugator = prefix.multiply(&rotation).expect("same rank");
        (
            CyclicWord { word: Word::from_reduced_unchecked(self.rank, canonical) },
            conjugator,
        )
    }

    /// The cyclically reduced core without rotating it.
    pub fn cyclic_core(&self) -> Word {
        let (start, end) = self.core_bounds();
        Word::from_reduced_unchecked(self.rank, self.letters[start..end].to_vec())
    }

    pub fn is_conjugate_to(&self, other: &Word) -> Result<bool, WordError> {
        self.rank.check(other.rank)?;
        Ok(self.cyclic_reduce().0 == other.cyclic_reduce().0)
    }

    /// Decomposes `self = root^exponent` with `root` not a proper power.
    pub fn primitive_root(&self) -> Result<(Word, usize), WordError> {
        if self.is_identity() {
            return Err(WordError::IdentityRoot);
        }
        let (start, end) = self.core_bounds();
        let core = &self.letters[start..end];
        let len = core.len();
        let period = (1..=len)
            .find(|&p| len.is_multiple_of(p) && (p..len).all(|i| core[i] == core[i - p]))
            .expect("len is always a period");
        let mut root = self.letters[..start].to_vec();
        root.extend_from_slice(&core[..period]);
        root.extend(self.letters[..start].iter().rev().map(|l| l.inverse()));
        Ok((Word::from_reduced_unchecked(self.rank, root), len / period))
    }

    /// Whether `pattern` occurs as a contiguous subword.
    pub fn contains_subword(&self, pattern: &Word) -> bool {
        pattern.is_empty()
            || self.letters.windows(pattern.len()).any(|w| w == pattern.letters.as_slice())
    }

    pub fn to_text(&self) -> String {
        self.letters.iter().map(|l| l.to_text()).collect()
    }
}

/// Index of the lexicographically least rotation (two-pointer minimum
/// expression, linear time).
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < n && j < n && k < n {
        let (x, y) = (s[(i + k) % n], s[(j + k) % n]);
        if x == y {
            k += 1;
            continue;
        }
        if x > y {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j).min(n.saturating_sub(1))
}

/// The little counting function c_w(g): the maximum number of pairwise
/// disjoint occurrences of `pattern` in the reduced form of `g`.
///
/// Occurrences of a fixed pattern are intervals of equal length, so taking the
/// leftmost available occurrence each time is optimal.
pub fn count_disjoint(pattern: &Word, g: &Word) -> Result<usize, WordError> {
    if pattern.is_identity() {
        return Err(WordError::EmptyPattern);
    }
    pattern.rank.check(g.rank)?;
    Ok(count_disjoint_slices(&pattern.letters, &g.letters))
}

pub(crate) fn count_disjoint_slices(pattern: &[Letter], text: &[Letter]) -> usize {
    let m = pattern.len();
    let mut count = 0;
    let mut i = 0;
    while i + m <= text.len() {
        if &text[i..i + m] == pattern {
            count += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    count
}

impl Ord for Word {
    /// Shortlex order under the fixed letter order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.len().cmp(&other.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            f.write_str("1")
        } else {
            f.write_str(&self.to_text())
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({}, F{})", self, self.rank)
    }
}

#[derive(Serialize, Deserialize)]
struct WordRepr {
    rank: usize,
    word: String,
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WordRepr { rank: self.rank.get(), word: self.to_text() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = WordRepr::deserialize(d)?;
        let rank = Rank::new(repr.rank).map_err(serde::de::Error::custom)?;
        Word::parse(rank, &repr.word).map_err(serde::de::Error::custom)
    }
}

/// A conjugacy class, stored as the least rotation of a cyclically reduced
/// word. Equality of cyclic words is conjugacy of the elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicWord {
    word: Word,
}

impl CyclicWord {
    pub fn of(g: &Word) -> Self {
        g.cyclic_reduce().0
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn into_word(self) -> Word {
        self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::of(&self.word.inverse())
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(f2(), s).unwrap()
    }

    #[test]
    fn reduce_cancels_adjacent_pairs() {
        let g = Word::from_letters(
            f2(),
            [Letter::new(0, false), Letter::new(1, false), Letter::new(1, true), Letter::new(0, false)],
        )
        .unwrap();
        assert_eq!(g, w("aa"));
        assert_eq!(g.len(), 2);
        assert_eq!(Word::from_letters(f2(), []).unwrap().len(), 0);
        assert_eq!(w("abA").to_text(), "abA");
    }

    #[test]
    fn out_of_range_letter_is_rejected() {
        assert_eq!(
            Word::parse(f2(), "ac"),
            Err(WordError::LetterOutOfRange { index: 2, rank: 2 })
        );
        assert!(matches!(Word::parse(f2(), "a?"), Err(WordError::Parse { ch: '?', pos: 1 })));
        assert_eq!(Rank::new(0), Err(WordError::ZeroRank));
    }

    #[test]
    fn multiplication_and_powers() {
        assert_eq!(w("ab").multiply(&w("Ba")).unwrap(), w("aa"));
        let cube = w("ab").pow(3);
        assert_eq!(cube, w("ababab"));
        assert_eq!(cube.len(), 6);
        assert_eq!(w("abA").pow(3), w("abbbA"));
        assert_eq!(w("ab").pow(-2), w("BABA"));
        assert!(w("aBBa").multiply(&w("aBBa").inverse()).unwrap().is_identity());
        let f3 = Word::parse(Rank::new(3).unwrap(), "c").unwrap();
        assert_eq!(w("a").multiply(&f3), Err(WordError::RankMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn conjugation_example() {
        // a⁻¹ · a²b² · a = ab²a
        assert_eq!(w("aabb").conjugate_by(&w("A")).unwrap(), w("abba"));
    }

    #[test]
    fn cyclic_reduction_postcondition() {
        for s in ["abba", "abA", "aabb", "", "AbaaBa", "abABBa"] {
            let g = w(s);
            let (core, u) = g.cyclic_reduce();
            assert!(core.word().is_cyclically_reduced());
            assert_eq!(core.word().conjugate_by(&u).unwrap(), g, "{s}");
        }
        let (core, u) = w("abba").cyclic_reduce();
        assert_eq!(core, CyclicWord::of(&w("bbaa")));
        assert_eq!(core.word(), &w("aabb"));
        assert_eq!(u, w("A"));
        let (core, u) = w("").cyclic_reduce();
        assert!(core.is_empty() && u.is_identity());
        let (core, u) = w("aabb").cyclic_reduce();
        assert_eq!((core.word().clone(), u), (w("aabb"), w("")));
    }

    #[test]
    fn least_rotation_matches_brute_force() {
        for s in ["abab", "bbaa", "BaBa", "aAbB", "baabaa", "b"] {
            let letters: Vec<Letter> = s.chars().map(|c| Letter::from_char(c).unwrap()).collect();
            let n = letters.len();
            let rot = |k: usize| -> Vec<Letter> {
                letters[k..].iter().chain(&letters[..k]).copied().collect()
            };
            let best = (0..n).map(rot).min().unwrap();
            assert_eq!(rot(least_rotation(&letters)), best, "{s}");
        }
    }

    #[test]
    fn disjoint_counts() {
        assert_eq!(count_disjoint(&w("ab"), &w("abab")).unwrap(), 2);
        assert_eq!(count_disjoint(&w("aa"), &w("aaa")).unwrap(), 1);
        assert_eq!(count_disjoint(&w("ab"), &w("BA")).unwrap(), 0);
        assert_eq!(count_disjoint(&w(""), &w("ab")), Err(WordError::EmptyPattern));
    }

    #[test]
    fn conjugacy() {
        assert!(w("aabb").is_conjugate_to(&w("abba")).unwrap());
        assert!(!w("a").is_conjugate_to(&w("b")).unwrap());
        assert!(w("abAB").is_conjugate_to(&w("abAB")).unwrap());
        assert!(!w("ab").is_conjugate_to(&w("AB")).unwrap());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(w("ababab").primitive_root().unwrap(), (w("ab"), 3));
        assert_eq!(w("aab").primitive_root().unwrap(), (w("aab"), 1));
        assert_eq!(w("a").primitive_root().unwrap(), (w("a"), 1));
        assert_eq!(w("baaaaB").primitive_root().unwrap(), (w("baB"), 4));
        assert_eq!(w("").primitive_root(), Err(WordError::IdentityRoot));
    }

    #[test]
    fn shortlex_order() {
        let mut v = [w("b"), w("A"), w("a"), w(""), w("aa"), w("B")];
        v.sort();
        let texts: Vec<String> = v.iter().map(|g| g.to_text()).collect();
        assert_eq!(texts, ["", "a", "A", "b", "B", "aa"]);
    }

    #[test]
    fn json_encoding() {
        let g = w("aBA");
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"rank":2,"word":"aBA"}"#);
        let back: Word = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Word>(r#"{"rank":0,"word":""}"#).is_err());
    }
}
