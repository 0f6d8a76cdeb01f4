//! End-to-end behavior: exact agreement of the dense and low-rank inference
//! paths, ground-truth recovery on planted corpora, determinism, and the
//! statistical consistency of the co-occurrence estimator.

mod common;

use common::{anchor_overlap, column_matched_l1, rel_frobenius, seeded, separable_factor};
use jsmf::cooc::{build_dense, CoocView, DenseCooccurrence};
use jsmf::corpus::{generate_synthetic, SyntheticSpec};
use jsmf::infer::{aw, law, lr_jsmf, LrJsmfConfig};
use jsmf::linalg::truncated_eig;
use jsmf::rectify::{ap_rectify, CompressedCooccurrence, SparseSym};
use ndarray::Array2;

fn wrap_factor(y: Array2<f64>) -> CompressedCooccurrence {
    let n = y.nrows();
    CompressedCooccurrence {
        factor: y,
        correction: SparseSym::empty(n),
        shift: 0.0,
        epsilon_bound: 0.0,
    }
}

#[test]
fn low_rank_inference_matches_dense_on_exact_inputs() {
    let mut rng = seeded(4242);
    for trial in 0..10 {
        let n = 40 + 15 * trial;
        let k = 2 + trial % 4;
        let y = separable_factor(n, k, &mut rng);
        let dense = DenseCooccurrence::new(y.dot(&y.t()));
        let dense_model = aw(&dense, k).unwrap();
        let lr_model = law(&wrap_factor(y), k).unwrap();

        assert_eq!(
            dense_model.anchors.indices, lr_model.anchors.indices,
            "trial {trial}: anchors diverged"
        );
        let b_err = rel_frobenius(&lr_model.word_topic, &dense_model.word_topic);
        assert!(b_err <= 1e-6, "trial {trial}: B error {b_err}");
        let a_err = rel_frobenius(&lr_model.correlation, &dense_model.correlation);
        assert!(a_err <= 1e-6, "trial {trial}: A error {a_err}");

        // the planted pure rows are the hull vertices, so the anchor set is
        // exactly {0..k} and each anchor's responsibility row is a vertex
        let mut found = lr_model.anchors.indices.clone();
        found.sort_unstable();
        assert_eq!(found, (0..k).collect::<Vec<_>>(), "trial {trial}");
        for (topic, &s) in lr_model.anchors.indices.iter().enumerate() {
            for t in 0..k {
                let expect = if t == topic { 1.0 } else { 0.0 };
                assert!((lr_model.responsibility[[s, t]] - expect).abs() < 1e-6);
            }
        }
        for a in 0..k {
            for b in 0..k {
                let diff =
                    (lr_model.correlation[[a, b]] - lr_model.correlation[[b, a]]).abs();
                assert!(diff < 1e-8, "A asymmetric at ({a},{b})");
            }
        }
    }
}

fn planted_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        vocab_size: 500,
        topics: 5,
        docs: 5000,
        doc_length: 50,
        dirichlet_doc: 0.25,
        anchor_mass: 0.35,
        seed,
    }
}

#[test]
fn dense_pipeline_recovers_planted_anchors() {
    let (corpus, truth) = generate_synthetic(&planted_spec(900)).unwrap();
    let raw = build_dense(&corpus).unwrap();
    let (rectified, report) = ap_rectify(&raw, 5, 300, 1e-6).unwrap();
    assert!(report.converged);
    let model = aw(&rectified, 5).unwrap();
    let overlap = anchor_overlap(&model.anchors.indices, &truth.anchors.indices);
    assert!(
        overlap >= 0.8,
        "recovered {:?}, planted {:?}",
        model.anchors.indices,
        truth.anchors.indices
    );
    // an anchor word belongs wholly to its topic
    for (topic, &s) in model.anchors.indices.iter().enumerate() {
        for t in 0..5 {
            let expect = if t == topic { 1.0 } else { 0.0 };
            assert!(
                (model.responsibility[[s, t]] - expect).abs() < 1e-6,
                "anchor row {s} is not the coordinate vector"
            );
        }
    }
}

#[test]
fn full_low_rank_pipeline_recovers_ground_truth() {
    let (corpus, truth) = generate_synthetic(&planted_spec(901)).unwrap();
    let outcome = lr_jsmf(&corpus, 5, &LrJsmfConfig::default()).unwrap();
    let overlap = anchor_overlap(&outcome.model.anchors.indices, &truth.anchors.indices);
    assert!(
        overlap >= 0.8,
        "anchors {:?} vs planted {:?}",
        outcome.model.anchors.indices,
        truth.anchors.indices
    );
    let l1 = column_matched_l1(&outcome.model.word_topic, &truth.word_topic);
    assert!(l1 <= 0.3, "column-matched L1 error {l1}");
}

#[test]
fn pipeline_is_deterministic_for_fixed_seeds() {
    let spec = SyntheticSpec {
        vocab_size: 150,
        topics: 4,
        docs: 1200,
        doc_length: 40,
        dirichlet_doc: 0.3,
        anchor_mass: 0.4,
        seed: 5,
    };
    let (corpus, _) = generate_synthetic(&spec).unwrap();
    let config = LrJsmfConfig {
        seed: 77,
        ..LrJsmfConfig::default()
    };
    let a = lr_jsmf(&corpus, 4, &config).unwrap();
    let b = lr_jsmf(&corpus, 4, &config).unwrap();
    assert_eq!(a.model.anchors.indices, b.model.anchors.indices);
    for (x, y) in a
        .model
        .word_topic
        .iter()
        .zip(b.model.word_topic.iter())
    {
        assert!((x - y).abs() <= 1e-12);
    }
    for (x, y) in a
        .model
        .correlation
        .iter()
        .zip(b.model.correlation.iter())
    {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn vocabulary_permutation_permutes_the_model() {
    let mut rng = seeded(31337);
    let n = 60;
    let k = 3;
    let y = separable_factor(n, k, &mut rng);
    let c = DenseCooccurrence::new(y.dot(&y.t()));
    let base = aw(&c, k).unwrap();

    // cyclic shift permutation: new index = (old + 7) mod n
    let perm: Vec<usize> = (0..n).map(|i| (i + 7) % n).collect();
    let mut permuted = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            permuted[[perm[i], perm[j]]] = c.matrix[[i, j]];
        }
    }
    let model = aw(&DenseCooccurrence::new(permuted), k).unwrap();

    let mapped: Vec<usize> = base.anchors.indices.iter().map(|&s| perm[s]).collect();
    let mut got = model.anchors.indices.clone();
    let mut expect = mapped.clone();
    got.sort_unstable();
    expect.sort_unstable();
    assert_eq!(got, expect, "anchor sets disagree under permutation");

    // B rows move with the permutation (match columns via anchor identity)
    for (topic_new, &anchor_new) in model.anchors.indices.iter().enumerate() {
        let topic_old = mapped.iter().position(|&m| m == anchor_new).unwrap();
        for i in 0..n {
            let a = model.word_topic[[perm[i], topic_new]];
            let b = base.word_topic[[i, topic_old]];
            assert!((a - b).abs() < 1e-8, "B mismatch at word {i}");
        }
    }
}

#[test]
fn estimator_concentrates_on_generative_moment() {
    // Monte-Carlo convergence of the unbiased estimator toward B A B^T
    let spec = SyntheticSpec {
        vocab_size: 40,
        topics: 4,
        docs: 50_000,
        doc_length: 100,
        dirichlet_doc: 0.3,
        anchor_mass: 0.4,
        seed: 63,
    };
    let (corpus, truth) = generate_synthetic(&spec).unwrap();
    let c = build_dense(&corpus).unwrap();
    let model = truth
        .word_topic
        .dot(&truth.correlation)
        .dot(&truth.word_topic.t());
    let err = rel_frobenius(&c.matrix, &model);
    assert!(err <= 0.05, "estimator error {err}");
}

#[test]
fn estimator_error_shrinks_with_corpus_size() {
    let mut errors = Vec::new();
    for &docs in &[500usize, 5_000, 50_000] {
        let spec = SyntheticSpec {
            vocab_size: 30,
            topics: 3,
            docs,
            doc_length: 30,
            dirichlet_doc: 0.3,
            anchor_mass: 0.4,
            seed: 17,
        };
        let (corpus, truth) = generate_synthetic(&spec).unwrap();
        let c = build_dense(&corpus).unwrap();
        let model = truth
            .word_topic
            .dot(&truth.correlation)
            .dot(&truth.word_topic.t());
        errors.push(rel_frobenius(&c.matrix, &model));
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not decreasing: {errors:?}"
    );
}

#[test]
fn implicit_operator_agrees_with_dense_at_scale() {
    let spec = SyntheticSpec {
        vocab_size: 200,
        topics: 4,
        docs: 1500,
        doc_length: 40,
        dirichlet_doc: 0.3,
        anchor_mass: 0.4,
        seed: 23,
    };
    let (corpus, _) = generate_synthetic(&spec).unwrap();
    let dense = build_dense(&corpus).unwrap();
    let implicit = jsmf::cooc::build_implicit(&corpus).unwrap();
    let mut rng = seeded(1);
    use rand::Rng;
    for _ in 0..5 {
        let x = ndarray::Array1::from_shape_fn(200, |_| rng.random_range(-1.0..1.0f64));
        let yd = jsmf::cooc::apply(&CoocView::Dense(&dense), x.view()).unwrap();
        let yi = jsmf::cooc::apply(&CoocView::Implicit(&implicit), x.view()).unwrap();
        let num: f64 = yd
            .iter()
            .zip(yi.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = yd.iter().map(|v| v * v).sum();
        assert!((num / den.max(1e-300)).sqrt() <= 1e-12);
    }

    // eigensolves through either operator agree
    let de = truncated_eig(&CoocView::Dense(&dense), 4, 1e-10, 60).unwrap();
    let ie = truncated_eig(&CoocView::Implicit(&implicit), 4, 1e-10, 60).unwrap();
    for (a, b) in de
        .pair
        .eigenvalues
        .iter()
        .zip(ie.pair.eigenvalues.iter())
    {
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-3));
    }
}
