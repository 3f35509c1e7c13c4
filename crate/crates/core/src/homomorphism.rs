//! Homomorphisms F_m → F_n and their classification with respect to the
//! conjugation-invariant word norms.
//!
//! Only isomorphisms are quasi-isometries. Every other homomorphism gets a
//! witness that can be rechecked independently:
//!
//! * non-injective: a nontrivial kernel element (the kernel is normal, so it
//!   is unbounded and collapses to a point);
//! * proper finite-index image: two families h₁ᵏh₂⁻ᵏ whose images stay
//!   within norm 2‖u‖ while a separating quasi-morphism forces the sources
//!   apart;
//! * infinite-index image: a cyclically reduced killer word w whose powers
//!   move away from the image at linear speed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binorm::{certificate_product, norm_lower, norm_upper, ConjugateFactor, NormError, DEFAULT_NORM_BUDGET};
use crate::killer::{cyclically_reduced_killer, killer_word, KillerError};
use crate::quasimorphism::{cyclic_subgroups_conjugate, separation_witness, CountingQm, QmConstants, QmError, QmValue};
use crate::stallings::{GraphError, Index, StallingsGraph};
use crate::word::{Letter, Rank, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Killer(#[from] KillerError),
    #[error(transparent)]
    Qm(#[from] QmError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("expected {expected} images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("the target has rank 1, where the classification does not apply")]
    RankOneTarget,
    #[error("the image is not a proper subgroup of finite index")]
    NotFiniteIndexProper,
    #[error("the image does not have infinite index")]
    NotInfiniteIndex,
    #[error("the homomorphism is not injective")]
    NotInjective,
    #[error("witness check failed: {0}")]
    WitnessFailed(String),
}

fn ensure(ok: bool, what: &str) -> Result<(), HomError> {
    if ok {
        Ok(())
    } else {
        Err(HomError::WitnessFailed(what.to_string()))
    }
}

/// φ: F_m → F_n given by the images of the standard generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HomRepr", into = "HomRepr")]
pub struct Homomorphism {
    source: Rank,
    target: Rank,
    images: Vec<Word>,
}

#[derive(Serialize, Deserialize)]
struct HomRepr {
    source_rank: usize,
    target_rank: usize,
    images: Vec<String>,
}

impl From<Homomorphism> for HomRepr {
    fn from(h: Homomorphism) -> Self {
        HomRepr {
            source_rank: h.source.get(),
            target_rank: h.target.get(),
            images: h.images.iter().map(Word::to_text).collect(),
        }
    }
}

impl TryFrom<HomRepr> for Homomorphism {
    type Error = HomError;

    fn try_from(r: HomRepr) -> Result<Self, HomError> {
        let target = Rank::new(r.target_rank)?;
        let images = r.images.iter().map(|s| Word::parse(target, s)).collect::<Result<Vec<_>, _>>()?;
        Homomorphism::new(Rank::new(r.source_rank)?, target, images)
    }
}

impl Homomorphism {
    pub fn new(source: Rank, target: Rank, images: Vec<Word>) -> Result<Self, HomError> {
        if images.len() != source.get() {
            return Err(HomError::ImageCount { expected: source.get(), got: images.len() });
        }
        if let Some(w) = images.iter().find(|w| w.rank() != target) {
            return Err(WordError::RankMismatch { left: target.get(), right: w.rank().get() }.into());
        }
        Ok(Homomorphism { source, target, images })
    }

    /// Parses images written in the word text syntax.
    pub fn parse(source: usize, target: usize, images: &[&str]) -> Result<Self, HomError> {
        let target = Rank::new(target)?;
        let images = images.iter().map(|s| Word::parse(target, s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(Rank::new(source)?, target, images)
    }

    pub fn identity(rank: Rank) -> Self {
        let images = (0..rank.get()).map(|i| Word::generator(rank, i).expect("within rank")).collect();
        Homomorphism { source: rank, target: rank, images }
    }

    pub fn source_rank(&self) -> Rank {
        self.source
    }

    pub fn target_rank(&self) -> Rank {
        self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn apply(&self, g: &Word) -> Result<Word, HomError> {
        if g.rank() != self.source {
            return Err(WordError::RankMismatch { left: self.source.get(), right: g.rank().get() }.into());
        }
        let mut letters: Vec<Letter> = Vec::new();
        for l in g.letters() {
            let image = &self.images[l.generator()];
            if l.is_inverse() {
                letters.extend(image.letters().iter().rev().map(|x| x.inverse()));
            } else {
                letters.extend_from_slice(image.letters());
            }
        }
        Ok(Word::from_letters(self.target, letters)?)
    }

    /// ι_u ∘ φ, where ι_u(g) = u g u⁻¹.
    pub fn conjugated(&self, u: &Word) -> Result<Self, HomError> {
        let images = self.images.iter().map(|w| w.conjugate_by(u)).collect::<Result<Vec<_>, _>>()?;
        Self::new(self.source, self.target, images)
    }

    pub fn compose(&self, after: &Homomorphism) -> Result<Self, HomError> {
        let images = self.images.iter().map(|w| after.apply(w)).collect::<Result<Vec<_>, _>>()?;
        Self::new(self.source, after.target, images)
    }

    pub fn image_graph(&self) -> StallingsGraph {
        StallingsGraph::build(self.target, &self.images).expect("images have the target rank")
    }
}

/// Limits for the searches behind the witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Radius of the image ball on which ψ̄_w is checked to vanish.
    pub image_ball_radius: usize,
    /// Path budget for enumerating that ball.
    pub max_paths: usize,
    /// Length budget passed to the norm upper bound.
    pub norm_budget: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { image_ball_radius: 12, max_paths: 5_000_000, norm_budget: DEFAULT_NORM_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// φ is an isomorphism, hence bi-Lipschitz; `inverse` is φ⁻¹.
    Isomorphism { inverse: Homomorphism },
    NonInjective { kernel_element: Word },
    FiniteIndexProper { index: usize, witness: Box<DistortionWitness> },
    InfiniteIndex { witness: Box<QsurFailureWitness> },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Isomorphism { .. } => "isomorphism",
            Verdict::NonInjective { .. } => "non_injective",
            Verdict::FiniteIndexProper { .. } => "finite_index_proper",
            Verdict::InfiniteIndex { .. } => "infinite_index",
        }
    }
}

/// Elements h₁, h₂ of the source whose images g₁ and g₂ = u g₁ u⁻¹ are
/// conjugate, while ⟨h₁⟩ and ⟨h₂⟩ are not conjugate in the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistortionWitness {
    pub h1: Word,
    pub h2: Word,
    pub g1: Word,
    pub g2: Word,
    pub u: Word,
    /// Exponents (k, ℓ) with xᵏ, yˡ in the normal core; g₁ = xᵏyˡ.
    pub exponents: (u64, u64),
    pub separating: CountingQm,
    pub values: (QmValue, QmValue),
    pub constants: QmConstants,
}

/// A cyclically reduced killer word w for the image, with ψ̄_w(w) = 1 and
/// ψ̄_w vanishing on the image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QsurFailureWitness {
    pub w: Word,
    pub constants: QmConstants,
    pub value_on_w: QmValue,
    pub checked_radius: usize,
    pub checked_elements: usize,
}

/// Decides which of the four cases `hom` falls into and builds the witness.
pub fn classify(hom: &Homomorphism, budgets: &Budgets) -> Result<Verdict, HomError> {
    let graph = hom.image_graph();
    if graph.subgroup_rank() < hom.source.get() {
        return Ok(Verdict::NonInjective { kernel_element: kernel_element(hom, &graph)? });
    }
    match graph.index() {
        Index::Finite(1) => Ok(Verdict::Isomorphism { inverse: inverse(hom, &graph)? }),
        Index::Finite(index) => {
            if hom.target.get() < 2 {
                return Err(HomError::RankOneTarget);
            }
            Ok(Verdict::FiniteIndexProper { index, witness: Box::new(distortion_witness_in(hom, &graph)?) })
        }
        Index::Infinite => Ok(Verdict::InfiniteIndex { witness: Box::new(qsur_witness_in(hom, &graph, budgets)?) }),
    }
}

/// Folding identifies two parallel edges exactly when the words they carry
/// differ by a relation among the images; the first such relation is a
/// kernel element.
fn kernel_element(hom: &Homomorphism, graph: &StallingsGraph) -> Result<Word, HomError> {
    let k = graph
        .relations()
        .first()
        .cloned()
        .ok_or_else(|| HomError::WitnessFailed("rank drops but folding recorded no relation".into()))?;
    ensure(!k.is_identity() && hom.apply(&k)?.is_identity(), "kernel element")?;
    Ok(k)
}

fn inverse(hom: &Homomorphism, graph: &StallingsGraph) -> Result<Homomorphism, HomError> {
    let images = (0..hom.target.get())
        .map(|i| {
            let s = Word::generator(hom.target, i)?;
            graph.membership(&s)?.ok_or_else(|| HomError::WitnessFailed("generator outside image".into()))
        })
        .collect::<Result<Vec<_>, HomError>>()?;
    let inv = Homomorphism::new(hom.target, hom.source, images)?;
    for i in 0..hom.source.get() {
        let s = Word::generator(hom.source, i)?;
        ensure(inv.apply(&hom.apply(&s)?)? == s, "inverse on the source")?;
    }
    for i in 0..hom.target.get() {
        let s = Word::generator(hom.target, i)?;
        ensure(hom.apply(&inv.apply(&s)?)? == s, "inverse on the target")?;
    }
    Ok(inv)
}

pub fn distortion_witness(hom: &Homomorphism) -> Result<DistortionWitness, HomError> {
    let graph = hom.image_graph();
    if graph.subgroup_rank() < hom.source.get() {
        return Err(HomError::NotInjective);
    }
    match graph.index() {
        Index::Finite(d) if d > 1 => {}
        _ => return Err(HomError::NotFiniteIndexProper),
    }
    if hom.target.get() < 2 {
        return Err(HomError::RankOneTarget);
    }
    distortion_witness_in(hom, &graph)
}

fn distortion_witness_in(hom: &Homomorphism, graph: &StallingsGraph) -> Result<DistortionWitness, HomError> {
    let n = hom.target;
    let cosets = graph.coset_data()?;
    let (k, l) = (cosets.exponents[0], cosets.exponents[1]);
    let x = Word::generator(n, 0)?;
    let y = Word::generator(n, 1)?;
    let g1 = x.pow(k as i64).multiply(&y.pow(l as i64))?;
    ensure(cosets.acts_trivially(&g1), "g1 in the normal core")?;
    ensure(g1.primitive_root()?.1 == 1, "g1 not a proper power")?;
    // a proper subgroup misses some generator, and shortlex order reaches
    // the generators before any longer word
    let u = n
        .letters()
        .map(|s| Word::letter(n, s).expect("within rank"))
        .find(|s| !graph.contains(s).expect("same rank"))
        .ok_or(HomError::NotFiniteIndexProper)?;
    let g2 = g1.conjugate_by(&u)?;
    let spell = |g: &Word| -> Result<Word, HomError> {
        graph.membership(g)?.ok_or_else(|| HomError::WitnessFailed(format!("{g} outside the image")))
    };
    let (h1, h2) = (spell(&g1)?, spell(&g2)?);
    ensure(hom.apply(&h1)? == g1 && hom.apply(&h2)? == g2, "preimages")?;
    ensure(g1.is_conjugate_to(&g2)?, "images conjugate")?;
    ensure(!cyclic_subgroups_conjugate(&h1, &h2), "sources not conjugate")?;
    let separating = separation_witness(&h1, &h2)?;
    let values = (separating.homogenize(&h1)?, separating.homogenize(&h2)?);
    ensure(values.0 != values.1, "separating values differ")?;
    let constants = separating.lipschitz_constants();
    Ok(DistortionWitness { h1, h2, g1, g2, u, exponents: (k, l), separating, values, constants })
}

/// One row of [`distortion_growth`] for x_k = h₁ᵏh₂⁻ᵏ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub k: u64,
    /// ψ̄(x_k) for the separating quasi-morphism.
    pub source_value: QmValue,
    /// |ψ̄(x_k)| / (B + 2D).
    pub source_qm_bound: QmValue,
    /// Best certified integer lower bound on ‖x_k‖.
    pub source_lower: u64,
    /// Certified upper bound on ‖φ(x_k)‖.
    pub image_upper: u64,
    pub image_certificate: Vec<ConjugateFactor>,
}

/// Source lower bounds and image upper bounds for x_k = h₁ᵏh₂⁻ᵏ.
///
/// φ(x_k) = (g₁ᵏ u g₁⁻ᵏ) · u⁻¹, so a certificate for u conjugated by g₁ᵏ
/// followed by one for u⁻¹ shows ‖φ(x_k)‖ ≤ 2‖u‖.
pub fn distortion_growth(
    witness: &DistortionWitness,
    hom: &Homomorphism,
    kmax: u64,
    budgets: &Budgets,
) -> Result<Vec<DistortionRow>, HomError> {
    let (u_norm, u_cert) = norm_upper(&witness.u, budgets.norm_budget);
    let u_inv_cert = norm_upper(&witness.u.inverse(), budgets.norm_budget).1;
    let c = &witness.constants.lipschitz_bound;
    let qms = [witness.separating.clone()];
    (0..=kmax)
        .map(|k| {
            let x = witness.h1.pow(k as i64).multiply(&witness.h2.pow(-(k as i64)))?;
            let source_value = witness.separating.homogenize(&x)?;
            let source_qm_bound = &source_value.abs() / c;
            let (source_lower, _, _) = norm_lower(&x, &qms)?;
            let image = hom.apply(&x)?;
            let shift = witness.g1.pow(k as i64);
            let mut image_certificate: Vec<ConjugateFactor> = u_cert
                .iter()
                .map(|f| ConjugateFactor { conjugator: shift.multiply(&f.conjugator).expect("same rank"), letter: f.letter })
                .collect();
            image_certificate.extend(u_inv_cert.iter().cloned());
            ensure(certificate_product(hom.target, &image_certificate) == image, "image certificate")?;
            // for k = 0 the two halves cancel
            if image.is_identity() {
                image_certificate.clear();
            }
            let image_upper = image_certificate.len() as u64;
            debug_assert!(image_upper <= 2 * u_norm);
            Ok(DistortionRow { k, source_value, source_qm_bound, source_lower, image_upper, image_certificate })
        })
        .collect()
}

pub fn qsur_failure_witness(hom: &Homomorphism, budgets: &Budgets) -> Result<QsurFailureWitness, HomError> {
    let graph = hom.image_graph();
    if graph.index() != Index::Infinite {
        return Err(HomError::NotInfiniteIndex);
    }
    qsur_witness_in(hom, &graph, budgets)
}

fn qsur_witness_in(hom: &Homomorphism, graph: &StallingsGraph, budgets: &Budgets) -> Result<QsurFailureWitness, HomError> {
    if hom.target.get() < 2 {
        return Err(HomError::RankOneTarget);
    }
    let killer = killer_word(graph)?;
    let w = cyclically_reduced_killer(graph, &killer)?.word;
    let qm = CountingQm::new(w.clone())?;
    let value_on_w = qm.homogenize(&w)?;
    ensure(value_on_w == QmValue::one(), "psi-bar of the killer word is 1")?;
    let ball = graph.enumerate_elements_limited(budgets.image_ball_radius, budgets.max_paths)?;
    for g in &ball {
        ensure(qm.homogenize(g)?.is_zero(), "psi-bar vanishes on the image")?;
    }
    Ok(QsurFailureWitness {
        constants: qm.lipschitz_constants(),
        w,
        value_on_w,
        checked_radius: budgets.image_ball_radius,
        checked_elements: ball.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QsurRow {
    pub k: u64,
    /// ψ̄_w(wᵏ), which is k.
    pub value: QmValue,
    /// k / (B + 2D) ≤ d(wᵏ, image).
    pub lower: QmValue,
}

/// Lower bounds on the distance from wᵏ to the image: ψ̄_w is
/// (B + 2D)-Lipschitz, equals k on wᵏ and vanishes on the image.
pub fn qsur_growth(witness: &QsurFailureWitness, kmax: u64) -> Result<Vec<QsurRow>, HomError> {
    let qm = CountingQm::new(witness.w.clone())?;
    (0..=kmax)
        .map(|k| {
            let value = qm.homogenize(&witness.w.pow(k as i64))?;
            ensure(value == QmValue::integer(k as i64), "psi-bar is homogeneous")?;
            let lower = &value / &witness.constants.lipschitz_bound;
            Ok(QsurRow { k, value, lower })
        })
        .collect()
}
