//! Certified bounds for the conjugation-invariant word norm ‖g‖ on F_n.
//!
//! Upper bounds come with an explicit factorization of `g` into conjugates
//! of generators and their inverses. Lower bounds come from Lipschitz
//! functions: signed exponent sums (homomorphisms to ℤ, constant 1), the
//! parity of the total exponent sum, and homogenised counting
//! quasi-morphisms with constant B + D.
//!
//! The norm equals the least number of letters whose deletion leaves a
//! word that freely reduces to 1 (deleting the generator letters of a
//! factorization leaves a trivial word, and free reduction never increases
//! that count). When the deletion search runs, its optimum is therefore also
//! a lower bound, recorded as [`LowerCertificate::Cancellation`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quasimorphism::{CountingQm, QmError, QmValue};
use crate::word::{Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Qm(#[from] QmError),
    #[error("{0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("the identity generates the trivial subgroup")]
    TrivialWord,
}

/// One factor `c · s · c⁻¹` of an upper-bound certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateFactor {
    pub conjugator: Word,
    pub letter: Letter,
}

impl ConjugateFactor {
    pub fn value(&self) -> Word {
        let s = Word::letter(self.conjugator.rank(), self.letter).expect("letter within rank");
        s.conjugate_by(&self.conjugator).expect("same rank")
    }
}

/// Multiplies out a certificate.
pub fn certificate_product(g_rank: crate::word::Rank, factors: &[ConjugateFactor]) -> Word {
    factors.iter().fold(Word::identity(g_rank), |acc, f| acc.multiply(&f.value()).expect("same rank"))
}

/// Which Lipschitz function realised a lower bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerCertificate {
    /// g = 1.
    Identity,
    /// The homomorphism g ↦ Σ εᵢ·eᵢ(g) with εᵢ = sign of the i-th exponent
    /// sum; it is 1-Lipschitz and takes the value `value`.
    ExponentSum { signs: Vec<i8>, value: u64 },
    /// A homogenised counting quasi-morphism: ‖g‖ ≥ |ψ̄(g)| / (B + D).
    QuasiMorphism { pattern: Word, value: QmValue, constant: QmValue },
    /// g ≠ 1, so ‖g‖ ≥ 1.
    Nontrivial,
    /// The exhaustive deletion search on the cyclic core found no smaller
    /// set of deletions.
    Cancellation { deletions: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormBounds {
    pub lower: u64,
    pub upper: u64,
    pub upper_certificate: Vec<ConjugateFactor>,
    pub lower_certificate: LowerCertificate,
    /// ‖g‖ ≡ total exponent sum (mod 2); set when parity raised the bound.
    pub parity_adjusted: bool,
}

impl NormBounds {
    pub fn exact(&self) -> Option<u64> {
        (self.lower == self.upper).then_some(self.upper)
    }
}

impl fmt::Display for NormBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lower == self.upper {
            write!(f, "{}", self.upper)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

/// Default length limit for the cubic deletion search in [`norm_upper`].
pub const DEFAULT_NORM_BUDGET: usize = 120;

/// Upper bound with certificate.
///
/// Deleting letters at positions `p₁ < … < p_k` of `g` so that the rest
/// freely reduces to 1 writes `g` as a product of `k` conjugates of the
/// deleted letters, conjugated by the prefix of kept letters. The minimum
/// number of deletions is found by interval dynamic programming over the
/// cyclic core, provided its length is at most `budget`; otherwise every
/// letter of the core is deleted. The certificate is conjugated back so that
/// it multiplies out to `g`.
pub fn norm_upper(g: &Word, budget: usize) -> (u64, Vec<ConjugateFactor>) {
    let (n, certificate, _) = upper_with_search(g, budget);
    (n, certificate)
}

/// Also reports whether the exhaustive deletion search ran.
fn upper_with_search(g: &Word, budget: usize) -> (u64, Vec<ConjugateFactor>, bool) {
    let (core, conjugator) = (g.cyclic_core(), core_conjugator(g));
    let searched = core.len() <= budget;
    let deleted = if searched { min_deletions(core.letters()) } else { (0..core.len()).collect() };
    let certificate: Vec<ConjugateFactor> = deletion_certificate(&core, &deleted)
        .into_iter()
        .map(|f| ConjugateFactor {
            conjugator: conjugator.multiply(&f.conjugator).expect("same rank"),
            letter: f.letter,
        })
        .collect();
    debug_assert_eq!(&certificate_product(g.rank(), &certificate), g);
    (certificate.len() as u64, certificate, searched)
}

/// The `u` with g = u · core · u⁻¹ for `core = g.cyclic_core()`.
fn core_conjugator(g: &Word) -> Word {
    let mut start = 0;
    let letters = g.letters();
    let mut end = letters.len();
    while end - start >= 2 && letters[start].cancels(letters[end - 1]) {
        start += 1;
        end -= 1;
    }
    Word::from_letters(g.rank(), letters[..start].iter().copied()).expect("valid letters")
}

fn deletion_certificate(g: &Word, deleted: &[usize]) -> Vec<ConjugateFactor> {
    let mut kept = Word::identity(g.rank());
    let mut out = Vec::with_capacity(deleted.len());
    let mut next = deleted.iter().peekable();
    for (i, &l) in g.letters().iter().enumerate() {
        if next.peek() == Some(&&i) {
            next.next();
            out.push(ConjugateFactor { conjugator: kept.clone(), letter: l });
        } else {
            kept = kept.multiply(&Word::letter(g.rank(), l).expect("within rank")).expect("same rank");
        }
    }
    debug_assert!(kept.is_identity());
    out
}

/// Positions to delete so that the remaining letters cancel completely, of
/// minimum size. A sequence reduces to 1 exactly when it admits a
/// non-crossing matching of mutually inverse letters.
fn min_deletions(s: &[Letter]) -> Vec<usize> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    // cost[i][j] for the half-open interval i..j, stored at i * (n + 1) + j
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut cost = vec![0u32; (n + 1) * (n + 1)];
    for width in 1..=n {
        for i in 0..=n - width {
            let j = i + width;
            let mut best = 1 + cost[idx(i + 1, j)];
            for k in i + 1..j {
                if s[k].cancels(s[i]) {
                    best = best.min(cost[idx(i + 1, k)] + cost[idx(k + 1, j)]);
                }
            }
            cost[idx(i, j)] = best;
        }
    }
    let mut deleted = Vec::new();
    let mut stack = vec![(0usize, n)];
    while let Some((i, j)) = stack.pop() {
        if i >= j {
            continue;
        }
        let c = cost[idx(i, j)];
        if c == 1 + cost[idx(i + 1, j)] {
            deleted.push(i);
            stack.push((i + 1, j));
            continue;
        }
        let k = (i + 1..j)
            .find(|&k| s[k].cancels(s[i]) && c == cost[idx(i + 1, k)] + cost[idx(k + 1, j)])
            .expect("optimal split exists");
        stack.push((i + 1, k));
        stack.push((k + 1, j));
    }
    deleted.sort_unstable();
    deleted
}

/// Lower bound from exponent sums, parity and the given quasi-morphisms.
pub fn norm_lower(g: &Word, witnesses: &[CountingQm]) -> Result<(u64, LowerCertificate, bool), NormError> {
    if g.is_identity() {
        return Ok((0, LowerCertificate::Identity, false));
    }
    let sums = g.exponent_sums();
    let l1: u64 = sums.iter().map(|s| s.unsigned_abs()).sum();
    let mut best = (1u64, LowerCertificate::Nontrivial);
    if l1 >= best.0 {
        let signs = sums.iter().map(|s| s.signum() as i8).collect();
        best = (l1, LowerCertificate::ExponentSum { signs, value: l1 });
    }
    for qm in witnesses {
        let value = qm.homogenize(g)?;
        let constant = qm.lipschitz_constants().norm_constant();
        let bound = (&value.abs() / &constant).ceil_u64();
        if bound > best.0 {
            best = (bound, LowerCertificate::QuasiMorphism { pattern: qm.pattern().clone(), value, constant });
        }
    }
    // each conjugate of a generator changes the total exponent sum by ±1
    let total: i64 = sums.iter().sum();
    let parity = total.rem_euclid(2) as u64;
    if best.0 % 2 != parity {
        return Ok((best.0 + 1, best.1, true));
    }
    Ok((best.0, best.1, false))
}

/// Upper and lower bounds together. Within `budget` the deletion search
/// settles the norm; otherwise the lower bound comes from [`norm_lower`].
pub fn norm_bounds(g: &Word, witnesses: &[CountingQm], budget: usize) -> Result<NormBounds, NormError> {
    let (upper, upper_certificate, searched) = upper_with_search(g, budget);
    let (lower, lower_certificate, parity_adjusted) = norm_lower(g, witnesses)?;
    debug_assert!(lower <= upper);
    if searched && lower < upper {
        let lower_certificate = LowerCertificate::Cancellation { deletions: upper };
        return Ok(NormBounds { lower: upper, upper, upper_certificate, lower_certificate, parity_adjusted: false });
    }
    Ok(NormBounds { lower, upper, upper_certificate, lower_certificate, parity_adjusted })
}

/// ‖g‖ when the certified bounds meet under `budget`, otherwise `None`.
pub fn norm_exact_small(g: &Word, budget: usize) -> Result<Option<u64>, NormError> {
    Ok(norm_bounds(g, &[], budget)?.exact())
}

/// One row of [`normal_subgroup_growth`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: u64,
    /// k · ψ̄_w(w) / (B + D), strictly increasing in k.
    pub qm_bound: QmValue,
    /// Best certified integer lower bound on ‖wᵏ‖.
    pub lower: u64,
}

/// Lower bounds on ‖wᵏ‖ for k = 0..=kmax, for cyclically reduced w ≠ 1.
pub fn normal_subgroup_growth(w: &Word, kmax: u64) -> Result<Vec<GrowthRow>, NormError> {
    if w.is_identity() {
        return Err(NormError::TrivialWord);
    }
    if !w.is_cyclically_reduced() {
        return Err(NormError::NotCyclicallyReduced(w.to_string()));
    }
    let qm = CountingQm::new(w.clone())?;
    let constant = qm.lipschitz_constants().norm_constant();
    let at_w = qm.homogenize(w)?;
    let witnesses = [qm];
    (0..=kmax)
        .map(|k| {
            let qm_bound = &(&QmValue::integer(k as i64) * &at_w) / &constant;
            let (lower, _, _) = norm_lower(&w.pow(k as i64), &witnesses)?;
            Ok(GrowthRow { k, qm_bound, lower })
        })
        .collect()
}
