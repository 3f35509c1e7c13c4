//! Free groups, counting quasi-morphisms, conjugation-invariant word norms,
//! Stallings graphs, killer words and the classification of homomorphisms
//! between free groups up to quasi-isometry of those norms.

pub mod binorm;
pub mod dihedral;
pub mod experiment;
pub mod homomorphism;
pub mod killer;
pub mod quasimorphism;
pub mod stallings;
pub mod word;

pub use binorm::{norm_bounds, norm_lower, norm_upper, ConjugateFactor, NormBounds, NormError};
pub use homomorphism::{classify, Budgets, HomError, Homomorphism, Verdict};
pub use killer::{killer_word, verify_killer, KillerError, KillerWord};
pub use quasimorphism::{separation_witness, CountingQm, QmError, QmValue};
pub use stallings::{GraphError, Index, StallingsGraph};
pub use word::{count_disjoint, CyclicWord, Letter, Rank, Word, WordError};
