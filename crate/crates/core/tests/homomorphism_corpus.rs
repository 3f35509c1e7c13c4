mod common;

use bifree::homomorphism::{distortion_growth, qsur_growth, HomError};
use bifree::quasimorphism::cyclic_subgroups_conjugate;
use bifree::{classify, verify_killer, Budgets, CountingQm, Homomorphism, QmValue, Verdict, Word};
use common::*;
use rand::Rng;

fn label_of(v: &Verdict) -> Label {
    match v {
        Verdict::Isomorphism { .. } => Label::Isomorphism,
        Verdict::NonInjective { .. } => Label::NonInjective,
        Verdict::FiniteIndexProper { index, .. } => Label::FiniteIndex(*index),
        Verdict::InfiniteIndex { .. } => Label::InfiniteIndex,
    }
}

fn generators(n: bifree::Rank) -> Vec<Word> {
    (0..n.get()).map(|i| Word::generator(n, i).unwrap()).collect()
}

/// Re-derives every claim in the verdict from scratch.
fn check_witness(hom: &Homomorphism, verdict: &Verdict) {
    match verdict {
        Verdict::Isomorphism { inverse } => {
            for s in generators(hom.source_rank()) {
                assert_eq!(inverse.apply(&hom.apply(&s).unwrap()).unwrap(), s);
            }
            for s in generators(hom.target_rank()) {
                assert_eq!(hom.apply(&inverse.apply(&s).unwrap()).unwrap(), s);
            }
        }
        Verdict::NonInjective { kernel_element } => {
            assert!(!kernel_element.is_identity());
            assert!(hom.apply(kernel_element).unwrap().is_identity());
        }
        Verdict::FiniteIndexProper { witness, .. } => {
            assert_eq!(hom.apply(&witness.h1).unwrap(), witness.g1);
            assert_eq!(hom.apply(&witness.h2).unwrap(), witness.g2);
            assert_eq!(witness.g1.conjugate_by(&witness.u).unwrap(), witness.g2);
            assert!(!cyclic_subgroups_conjugate(&witness.h1, &witness.h2));
            let qm = CountingQm::new(witness.separating.pattern().clone()).unwrap();
            let (v1, v2) = (qm.homogenize(&witness.h1).unwrap(), qm.homogenize(&witness.h2).unwrap());
            assert_eq!((&v1, &v2), (&witness.values.0, &witness.values.1));
            assert_ne!(v1, v2);
            let rows = distortion_growth(witness, hom, 12, &Budgets::default()).unwrap();
            for r in &rows {
                assert!(r.image_upper <= 2);
                assert!(r.source_qm_bound <= QmValue::integer(r.source_lower as i64));
            }
            assert!(rows.windows(2).all(|p| p[0].source_qm_bound <= p[1].source_qm_bound));
            assert!(rows.last().unwrap().source_qm_bound > rows[1].source_qm_bound);
        }
        Verdict::InfiniteIndex { witness } => {
            let graph = hom.image_graph();
            assert!(witness.w.is_cyclically_reduced());
            assert!(verify_killer(&graph, &witness.w));
            let qm = CountingQm::new(witness.w.clone()).unwrap();
            assert_eq!(qm.homogenize(&witness.w).unwrap(), QmValue::one());
            // an independent spot check of vanishing on products of images
            for x in naive_subgroup_ball(hom.images(), 4, 40) {
                assert!(qm.homogenize(&x).unwrap().is_zero(), "{x}");
            }
            let rows = qsur_growth(witness, 9).unwrap();
            assert!(rows.windows(2).all(|p| p[0].lower < p[1].lower));
        }
    }
}

#[test]
fn corpus_is_classified_with_verified_witnesses() {
    let corpus = labelled_corpus();
    assert!(corpus.len() >= 20);
    let mut wrong = Vec::new();
    for (name, m, n, images, label) in &corpus {
        let hom = Homomorphism::parse(*m, *n, images).unwrap();
        let verdict = classify(&hom, &Budgets::default()).unwrap();
        if label_of(&verdict) != *label {
            wrong.push((*name, label_of(&verdict)));
            continue;
        }
        check_witness(&hom, &verdict);
    }
    assert!(wrong.is_empty(), "misclassified: {wrong:?}");
}

#[test]
fn verdict_is_invariant_under_inner_and_outer_automorphisms() {
    let budgets = Budgets { image_ball_radius: 8, ..Budgets::default() };
    let mut r = rng(3);
    for (name, m, n, images, label) in labelled_corpus() {
        let hom = Homomorphism::parse(m, n, &images).unwrap();
        for _ in 0..3 {
            let len = r.random_range(0..5);
            let u = random_reduced(&mut r, hom.target_rank(), len);
            let moved = hom.conjugated(&u).unwrap();
            let verdict = classify(&moved, &budgets).unwrap();
            assert_eq!(label_of(&verdict), label, "{name} conjugated by {u}");
            check_witness(&moved, &verdict);
        }
        if m >= 2 {
            // precompose with the transvection x ↦ xy
            let mut t: Vec<Word> = generators(hom.source_rank());
            t[0] = t[0].multiply(&t[1]).unwrap();
            let twisted = Homomorphism::new(hom.source_rank(), hom.source_rank(), t).unwrap().compose(&hom).unwrap();
            let verdict = classify(&twisted, &budgets).unwrap();
            assert_eq!(label_of(&verdict), label, "{name} after a transvection");
            check_witness(&twisted, &verdict);
        }
    }
}

#[test]
fn rank_one_target_with_proper_finite_index_is_rejected() {
    let hom = Homomorphism::parse(1, 1, &["aa"]).unwrap();
    assert!(matches!(classify(&hom, &Budgets::default()), Err(HomError::RankOneTarget)));
}

#[test]
fn verdicts_serialise_with_a_kind_tag() {
    for (_, m, n, images, _) in labelled_corpus().into_iter().take(24).step_by(5) {
        let hom = Homomorphism::parse(m, n, &images).unwrap();
        let verdict = classify(&hom, &Budgets { image_ball_radius: 6, ..Budgets::default() }).unwrap();
        let json = serde_json::to_value(&verdict).unwrap();
        assert_eq!(json["kind"], verdict.kind());
        let back: Verdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, verdict);
    }
}
