//! Little counting quasi-morphisms ψ_w(g) = c_w(g) − c_{w⁻¹}(g) and their
//! exact homogenisations.
//!
//! The homogenisation ψ̄_w(g) = lim ψ_w(gⁿ)/n is computed without any
//! floating point. For a cyclically reduced core `c` the greedy disjoint scan
//! of `w` over `c c c ...` carries at most ℓ(w) distinct offsets across block
//! boundaries, so the per-block counts become periodic after at most ℓ(w)+1
//! blocks and the limit is the exact rational `K / P` of one period.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::{count_disjoint_slices, Letter, Rank, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QmError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("homogenisation did not stabilise within {blocks} blocks")]
    BudgetExhausted { blocks: usize },
    #[error("the cyclic subgroups generated by {g} and {h} are conjugate")]
    ConjugateSubgroups { g: String, h: String },
    #[error("both elements are trivial")]
    BothTrivial,
}

/// An exact rational value, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QmValue(BigRational);

impl QmValue {
    pub fn new(num: i64, den: i64) -> Self {
        QmValue(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(n: i64) -> Self {
        QmValue(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        QmValue(BigRational::zero())
    }

    pub fn one() -> Self {
        QmValue(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        QmValue(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Least integer ≥ self.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn ceil_u64(&self) -> u64 {
        self.ceil().to_u64().unwrap_or(0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for QmValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for QmValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QmValue({self})")
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for QmValue {
            type Output = QmValue;
            fn $m(self, rhs: QmValue) -> QmValue {
                QmValue(self.0.$m(rhs.0))
            }
        }
        impl $tr for &QmValue {
            type Output = QmValue;
            fn $m(self, rhs: &QmValue) -> QmValue {
                QmValue((&self.0).$m(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for QmValue {
    type Output = QmValue;
    fn neg(self) -> QmValue {
        QmValue(-self.0)
    }
}

impl From<i64> for QmValue {
    fn from(n: i64) -> Self {
        QmValue::integer(n)
    }
}

/// JSON form `{"num": …, "den": …}`. Components that do not fit in an `i64`
/// are written as decimal strings.
#[derive(Serialize, Deserialize)]
struct QmValueRepr {
    num: json_num::Num,
    den: json_num::Num,
}

mod json_num {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Num {
        Small(i64),
        Big(String),
    }

    impl From<&BigInt> for Num {
        fn from(b: &BigInt) -> Self {
            b.to_i64().map(Num::Small).unwrap_or_else(|| Num::Big(b.to_string()))
        }
    }

    impl Num {
        pub fn to_bigint(&self) -> Option<BigInt> {
            match self {
                Num::Small(n) => Some(BigInt::from(*n)),
                Num::Big(s) => s.parse().ok(),
            }
        }
    }
}

impl Serialize for QmValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QmValueRepr { num: self.numer().into(), den: self.denom().into() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QmValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = QmValueRepr::deserialize(d)?;
        let num = repr.num.to_bigint().ok_or_else(|| D::Error::custom("bad numerator"))?;
        let den = repr.den.to_bigint().ok_or_else(|| D::Error::custom("bad denominator"))?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(QmValue(BigRational::new(num, den)))
    }
}

/// The little counting quasi-morphism ψ_w for a nontrivial reduced pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountingQm {
    pattern: Word,
}

/// Constants entering the Lipschitz estimate for ψ̄_w.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QmConstants {
    /// Defect of the homogenisation, 2 · (defect of ψ_w ≤ 2).
    pub defect_bound: QmValue,
    /// max |ψ̄_w(s)| over the standard generators.
    pub generator_bound: QmValue,
    /// B + 2D: |ψ̄(g) − ψ̄(h)| ≤ (B + 2D) · d(g, h).
    pub lipschitz_bound: QmValue,
}

impl QmConstants {
    /// B + D: |ψ̄(g)| ≤ (B + D) · ‖g‖.
    pub fn norm_constant(&self) -> QmValue {
        &self.generator_bound + &self.defect_bound
    }
}

/// Defect of ψ_w itself.
pub const COUNTING_DEFECT: i64 = 2;
/// Defect bound used for ψ̄_w.
pub const HOMOGENEOUS_DEFECT: i64 = 2 * COUNTING_DEFECT;

impl CountingQm {
    pub fn new(pattern: Word) -> Result<Self, QmError> {
        if pattern.is_identity() {
            return Err(WordError::EmptyPattern.into());
        }
        Ok(CountingQm { pattern })
    }

    pub fn pattern(&self) -> &Word {
        &self.pattern
    }

    pub fn rank(&self) -> Rank {
        self.pattern.rank()
    }

    fn check_rank(&self, g: &Word) -> Result<(), QmError> {
        if g.rank() != self.rank() {
            return Err(WordError::RankMismatch { left: self.rank().get(), right: g.rank().get() }
                .into());
        }
        Ok(())
    }

    /// ψ_w(g) = c_w(g) − c_{w⁻¹}(g).
    pub fn psi(&self, g: &Word) -> Result<i64, QmError> {
        self.check_rank(g)?;
        Ok(self.psi_letters(g.letters()))
    }

    pub(crate) fn psi_letters(&self, letters: &[Letter]) -> i64 {
        let inv = self.pattern.inverse();
        count_disjoint_slices(self.pattern.letters(), letters) as i64
            - count_disjoint_slices(inv.letters(), letters) as i64
    }

    /// Exact ψ̄_w(g).
    pub fn homogenize(&self, g: &Word) -> Result<QmValue, QmError> {
        self.homogenize_within(g, self.pattern.len() + 1)
    }

    /// Like [`homogenize`](Self::homogenize) but gives up after scanning
    /// `max_blocks` copies of the core. `ℓ(w) + 1` blocks always suffice.
    pub fn homogenize_within(&self, g: &Word, max_blocks: usize) -> Result<QmValue, QmError> {
        self.check_rank(g)?;
        let core = g.cyclic_core();
        if core.is_identity() {
            return Ok(QmValue::zero());
        }
        let inv = self.pattern.inverse();
        let forward = periodic_rate(self.pattern.letters(), core.letters(), max_blocks)?;
        let backward = periodic_rate(inv.letters(), core.letters(), max_blocks)?;
        Ok(forward - backward)
    }

    /// max |ψ(g) − ψ(gh) + ψ(h)| over the samples.
    pub fn defect_probe<'a>(
        &self,
        samples: impl IntoIterator<Item = (&'a Word, &'a Word)>,
    ) -> Result<QmValue, QmError> {
        let mut worst = 0i64;
        for (g, h) in samples {
            let gh = g.multiply(h)?;
            let d = (self.psi(g)? - self.psi(&gh)? + self.psi(h)?).abs();
            worst = worst.max(d);
        }
        Ok(QmValue::integer(worst))
    }

    pub fn lipschitz_constants(&self) -> QmConstants {
        let rank = self.rank();
        let generator_bound = (0..rank.get())
            .map(|i| {
                let s = Word::generator(rank, i).expect("index within rank");
                self.homogenize(&s).expect("same rank").abs()
            })
            .max()
            .unwrap_or_else(QmValue::zero);
        let defect_bound = QmValue::integer(HOMOGENEOUS_DEFECT);
        let lipschitz_bound = &generator_bound + &(&defect_bound + &defect_bound);
        QmConstants { defect_bound, generator_bound, lipschitz_bound }
    }
}

impl fmt::Display for CountingQm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi[{}]", self.pattern)
    }
}

/// lim c_p(cⁿ)/n for a cyclically reduced nonempty `core`.
fn periodic_rate(pattern: &[Letter], core: &[Letter], max_blocks: usize) -> Result<QmValue, QmError> {
    let (m, len) = (pattern.len(), core.len());
    let matches_at = |start: usize| (0..m).all(|i| core[(start + i) % len] == pattern[i]);
    // offset of the next admissible start relative to the current block
    let mut offset = 0usize;
    let mut total = 0i64;
    let mut seen: HashMap<usize, (usize, i64)> = HashMap::new();
    for block in 0..=max_blocks {
        if let Some(&(first_block, first_total)) = seen.get(&offset) {
            let period = (block - first_block) as i64;
            return Ok(QmValue::new(total - first_total, period));
        }
        seen.insert(offset, (block, total));
        let mut pos = offset;
        while pos < len {
            if matches_at(pos) {
                total += 1;
                pos += m;
            } else {
                pos += 1;
            }
        }
        offset = pos - len;
    }
    Err(QmError::BudgetExhausted { blocks: max_blocks })
}

/// A homogeneous counting quasi-morphism separating two elements whose
/// cyclic subgroups are not conjugate.
///
/// The pattern is the cyclic reduction of the longer element (the first one
/// on ties); its homogenisation is 1 there and strictly less than 1 in
/// absolute value on the other element.
pub fn separation_witness(g: &Word, h: &Word) -> Result<CountingQm, QmError> {
    if g.rank() != h.rank() {
        return Err(WordError::RankMismatch { left: g.rank().get(), right: h.rank().get() }.into());
    }
    let (cg, ch) = (g.cyclic_core(), h.cyclic_core());
    if cg.is_identity() && ch.is_identity() {
        return Err(QmError::BothTrivial);
    }
    if cyclic_subgroups_conjugate(g, h) {
        return Err(QmError::ConjugateSubgroups { g: g.to_string(), h: h.to_string() });
    }
    let pattern = if ch.len() > cg.len() { ch } else { cg };
    CountingQm::new(pattern)
}

/// Whether ⟨g⟩ and ⟨h⟩ are conjugate subgroups, i.e. g ~ h or g ~ h⁻¹.
pub fn cyclic_subgroups_conjugate(g: &Word, h: &Word) -> bool {
    let (cg, ch) = (g.cyclic_reduce().0, h.cyclic_reduce().0);
    cg == ch || cg == ch.inverse()
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

    fn qm(s: &str) -> CountingQm {
        CountingQm::new(w(s)).unwrap()
    }

    /// lim ψ(gⁿ)/n estimated from a long power: the sequence ψ(g^N) is exactly
    /// linear in N once N exceeds the period, so differences stabilise.
    fn slope_oracle(q: &CountingQm, g: &Word) -> QmValue {
        let n = 60;
        let a = q.psi(&g.pow(n)).unwrap();
        let b = q.psi(&g.pow(2 * n)).unwrap();
        QmValue::new(b - a, n)
    }

    #[test]
    fn psi_examples() {
        assert_eq!(qm("ab").psi(&w("abab")).unwrap(), 2);
        assert_eq!(qm("ab").psi(&w("BA")).unwrap(), -1);
        assert_eq!(qm("abAB").psi(&w("")).unwrap(), 0);
    }

    #[test]
    fn homogenize_examples() {
        assert_eq!(qm("AbaaB").homogenize(&w("AbaaB")).unwrap(), QmValue::one());
        assert_eq!(qm("Abaab").homogenize(&w("Abaab")).unwrap(), QmValue::one());
        assert_eq!(qm("aabb").homogenize(&w("ab")).unwrap(), QmValue::zero());
        assert_eq!(slope_oracle(&qm("aabb"), &w("ab")), QmValue::zero());
        assert_eq!(qm("ab").homogenize(&w("ba")).unwrap(), QmValue::one());
        assert_eq!(qm("ab").homogenize(&w("")).unwrap(), QmValue::zero());
        assert_eq!(qm("aa").homogenize(&w("a")).unwrap(), QmValue::new(1, 2));
        assert_eq!(qm("aa").homogenize(&w("A")).unwrap(), QmValue::new(-1, 2));
    }

    #[test]
    fn homogenize_matches_slope_oracle() {
        for (p, g) in [("aba", "ab"), ("aa", "aab"), ("abA", "abAbb"), ("bab", "ba"), ("aaa", "aa")] {
            let q = qm(p);
            assert_eq!(q.homogenize(&w(g)).unwrap(), slope_oracle(&q, &w(g)), "{p} on {g}");
        }
    }

    #[test]
    fn budget_is_reported() {
        // pattern length 3 needs up to 4 blocks; one block is not enough to
        // see a repeated offset
        assert!(matches!(
            qm("aaa").homogenize_within(&w("a"), 1),
            Err(QmError::BudgetExhausted { blocks: 1 })
        ));
    }

    #[test]
    fn separation_examples() {
        let s = separation_witness(&w("aabb"), &w("ab")).unwrap();
        assert_eq!(s.pattern(), &w("aabb"));
        assert_eq!(s.homogenize(&w("aabb")).unwrap(), QmValue::one());
        assert_eq!(s.homogenize(&w("ab")).unwrap(), QmValue::zero());

        let g = w("aab");
        let conj = g.conjugate_by(&w("ba")).unwrap();
        assert!(matches!(separation_witness(&g, &conj), Err(QmError::ConjugateSubgroups { .. })));
        assert!(matches!(separation_witness(&w("ab"), &w("AB")), Err(QmError::ConjugateSubgroups { .. })));
        assert_eq!(separation_witness(&w(""), &w("")), Err(QmError::BothTrivial));
        // the pattern comes from the longer element
        let s = separation_witness(&w("a"), &w("abb")).unwrap();
        assert_eq!(s.pattern(), &w("abb"));
    }

    #[test]
    fn defect_probe_examples() {
        let q = qm("ab");
        let one = w("");
        let g = w("abAB");
        assert_eq!(q.defect_probe([(&one, &g)]).unwrap(), QmValue::zero());
        let ab = w("ab");
        assert_eq!(q.defect_probe([(&ab, &ab)]).unwrap(), QmValue::zero());
    }

    #[test]
    fn lipschitz_examples() {
        let c = qm("Abaab").lipschitz_constants();
        assert_eq!(c.generator_bound, QmValue::zero());
        assert_eq!(c.lipschitz_bound, QmValue::integer(8));
        let c = qm("a").lipschitz_constants();
        assert_eq!(c.generator_bound, QmValue::one());
        assert_eq!(c.lipschitz_bound, QmValue::integer(9));
        assert!(c.lipschitz_bound >= &c.defect_bound + &c.defect_bound);
    }

    #[test]
    fn value_json_shape() {
        let v = QmValue::new(-3, 6);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"num":-1,"den":2}"#);
        assert_eq!(serde_json::from_str::<QmValue>(&s).unwrap(), v);
    }
}
