//! Topic recovery: the dense anchor-word baseline, its low-rank counterpart
//! operating on the compressed factor, and the end-to-end pipeline that never
//! materializes the N x N co-occurrence.
//!
//! Conventions: `B` (here `word_topic`) is N x K with column k the word
//! distribution of topic k; the responsibilities `Bbreve` are N x K with row
//! i the topic distribution of word i. The topic correlation `A` is K x K and
//! symmetrized on output.

use crate::cooc::{build_implicit, CoocView, DenseCooccurrence};
use crate::corpus::BagOfWords;
use crate::linalg::{
    column_pivoted_qr, randomized_eig, simplex_least_squares, solve, thin_qr, LinalgError,
    PivotSet,
};
use crate::rectify::{enn_rectify, CompressedCooccurrence, EnnReport};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use thiserror::Error;

/// Rows whose marginal falls at or below this fraction of the largest
/// marginal are treated as degenerate: excluded from anchor candidacy, given
/// a uniform responsibility row, and assigned zero marginal mass.
const DEGENERACY_FLOOR: f64 = 1e-12;

/// Fraction of degenerate rows beyond which low-rank inference refuses to
/// proceed; it signals a failed rectification.
const MAX_DEGENERATE_FRACTION: f64 = 0.2;

#[derive(Error, Debug)]
pub enum InferError {
    #[error("co-occurrence has negative entry {value:.3e} at ({i}, {j}); rectify first")]
    NotNonnegative { value: f64, i: usize, j: usize },
    #[error("only {found} independent rows found, {needed} topics requested")]
    RankDeficient { found: usize, needed: usize },
    #[error("topic {topic} received zero total mass")]
    DegenerateTopic { topic: usize },
    #[error("{count} of {n} rows are degenerate; rectification looks failed")]
    TooManyDegenerateRows { count: usize, n: usize },
    #[error("anchor rows are singular: {0}")]
    SingularAnchors(LinalgError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A recovered topic model.
#[derive(Debug, Clone)]
pub struct TopicModel {
    /// Anchor word indices in selection order.
    pub anchors: PivotSet,
    /// N x K word-topic matrix B; columns sum to one.
    pub word_topic: Array2<f64>,
    /// N x K responsibilities; rows sum to one (degenerate rows uniform).
    pub responsibility: Array2<f64>,
    /// K x K symmetric topic correlation matrix A.
    pub correlation: Array2<f64>,
    /// Word marginal d (row sums of the rectified co-occurrence); degenerate
    /// rows carry zero.
    pub word_marginal: Array1<f64>,
    /// Rows flagged by the degeneracy floor.
    pub degenerate_rows: Vec<usize>,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.word_topic.ncols()
    }

    pub fn num_words(&self) -> usize {
        self.word_topic.nrows()
    }
}

/// The dense anchor-word baseline on a rectified co-occurrence.
pub fn aw(c: &DenseCooccurrence, k: usize) -> Result<TopicModel, InferError> {
    let n = c.n();
    for ((i, j), &v) in c.matrix.indexed_iter() {
        if v < -1e-12 {
            return Err(InferError::NotNonnegative { value: v, i, j });
        }
    }
    let d: Array1<f64> = c.matrix.dot(&Array1::from_elem(n, 1.0));
    let degenerate = degenerate_rows(d.view());

    // row-normalized co-occurrence; degenerate rows stay zero
    let mut cbar = c.matrix.clone();
    for i in 0..n {
        let di = d[i];
        if degenerate[i] || di <= 0.0 {
            cbar.row_mut(i).fill(0.0);
        } else {
            cbar.row_mut(i).mapv_inplace(|v| v / di);
        }
    }

    let pivots = select_anchors(cbar.t(), k, &degenerate)?;
    let anchor_rows = gather_rows(cbar.view(), &pivots.indices);
    let ls = simplex_least_squares(cbar.view(), anchor_rows.view());
    let mut responsibility = ls.coefficients;
    uniformize_degenerate(&mut responsibility, &degenerate);

    let d_masked = mask_marginal(d.view(), &degenerate);
    let word_topic = recover_b(responsibility.view(), d_masked.view())?;

    let c_ss = gather_square(&c.matrix, &pivots.indices);
    let correlation = recover_correlation(&word_topic, &pivots.indices, &c_ss)?;

    Ok(TopicModel {
        anchors: pivots,
        word_topic,
        responsibility,
        correlation,
        word_marginal: d_masked,
        degenerate_rows: flagged(&degenerate),
    })
}

/// Low-rank anchor-word inference. Consumes only the factor `Y` of the
/// compressed co-occurrence; matches the dense baseline exactly whenever
/// `Y Y^T` is entrywise nonnegative.
pub fn law(compressed: &CompressedCooccurrence, k: usize) -> Result<TopicModel, InferError> {
    let y = &compressed.factor;
    let n = y.nrows();
    let ones = Array1::from_elem(n, 1.0);
    let d: Array1<f64> = y.dot(&y.t().dot(&ones));
    let degenerate = degenerate_rows(d.view());
    let degenerate_count = degenerate.iter().filter(|&&b| b).count();
    if degenerate_count as f64 > MAX_DEGENERATE_FRACTION * n as f64 {
        return Err(InferError::TooManyDegenerateRows {
            count: degenerate_count,
            n,
        });
    }

    // ybar = diag(d)^{-1} Y on non-degenerate rows
    let mut ybar = y.clone();
    for i in 0..n {
        if degenerate[i] || d[i] <= 0.0 {
            ybar.row_mut(i).fill(0.0);
        } else {
            let di = d[i];
            ybar.row_mut(i).mapv_inplace(|v| v / di);
        }
    }

    // X = Ybar R^T embeds the row-normalized co-occurrence in K dimensions
    let qr = thin_qr(y.view());
    let x = ybar.dot(&qr.r.t());

    let pivots = select_anchors(x.t(), k, &degenerate)?;
    let anchor_rows = gather_rows(x.view(), &pivots.indices);
    let ls = simplex_least_squares(x.view(), anchor_rows.view());
    let mut responsibility = ls.coefficients;
    uniformize_degenerate(&mut responsibility, &degenerate);

    let d_masked = mask_marginal(d.view(), &degenerate);
    let word_topic = recover_b(responsibility.view(), d_masked.view())?;

    // A = B_S^{-1} (Y_S Y_S^T) B_S^{-1}
    let y_s = gather_rows(y.view(), &pivots.indices);
    let c_ss = y_s.dot(&y_s.t());
    let correlation = recover_correlation(&word_topic, &pivots.indices, &c_ss)?;

    Ok(TopicModel {
        anchors: pivots,
        word_topic,
        responsibility,
        correlation,
        word_marginal: d_masked,
        degenerate_rows: flagged(&degenerate),
    })
}

/// Bayes-rule recovery of the word-topic matrix from responsibilities and the
/// word marginal: `B_ik = Bbreve_ik d_i / sum_j Bbreve_jk d_j`.
pub fn recover_b(
    responsibility: ArrayView2<f64>,
    d: ArrayView1<f64>,
) -> Result<Array2<f64>, InferError> {
    let (n, k) = responsibility.dim();
    assert_eq!(n, d.len(), "marginal length mismatch");
    let mut b = Array2::<f64>::zeros((n, k));
    for i in 0..n {
        let di = d[i].max(0.0);
        for t in 0..k {
            b[[i, t]] = responsibility[[i, t]] * di;
        }
    }
    for t in 0..k {
        let mass: f64 = b.column(t).sum();
        if mass <= 0.0 {
            return Err(InferError::DegenerateTopic { topic: t });
        }
        b.column_mut(t).mapv_inplace(|v| v / mass);
    }
    Ok(b)
}

/// Configuration of the end-to-end low-rank pipeline.
#[derive(Debug, Clone)]
pub struct LrJsmfConfig {
    pub oversampling: usize,
    pub power_iters: usize,
    pub seed: u64,
    /// Screened-row budget for the correction; defaults to 10K + 1000.
    pub i_size: Option<usize>,
    pub enn_max_iters: usize,
    pub enn_tol: f64,
}

impl Default for LrJsmfConfig {
    fn default() -> Self {
        Self {
            oversampling: 10,
            power_iters: 2,
            seed: 0,
            i_size: None,
            enn_max_iters: 100,
            enn_tol: 1e-5,
        }
    }
}

impl LrJsmfConfig {
    pub fn i_size_for(&self, k: usize) -> usize {
        self.i_size.unwrap_or(10 * k + 1000)
    }
}

/// An error tagged with the pipeline stage that produced it.
#[derive(Error, Debug)]
#[error("stage {stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            stage,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LrJsmfOutcome {
    pub model: TopicModel,
    pub compressed: CompressedCooccurrence,
    pub enn_report: EnnReport,
    /// (stage name, seconds) pairs in execution order.
    pub stage_seconds: Vec<(&'static str, f64)>,
}

/// The full low-rank pipeline: implicit co-occurrence operator, randomized
/// eigendecomposition, epsilon non-negative rectification, low-rank
/// inference. Peak memory stays at O(NK + nnz(H) + nnz(E)); the dense matrix
/// is never formed.
pub fn lr_jsmf(
    corpus: &BagOfWords,
    k: usize,
    config: &LrJsmfConfig,
) -> Result<LrJsmfOutcome, PipelineError> {
    let mut stage_seconds = Vec::new();
    let clock = std::time::Instant::now();

    let implicit = build_implicit(corpus).map_err(|e| PipelineError::new("cooc", e))?;
    let mut last = clock.elapsed().as_secs_f64();
    stage_seconds.push(("cooc", last));

    let view = CoocView::Implicit(&implicit);
    let init = randomized_eig(&view, k, config.oversampling, config.power_iters, config.seed)
        .map_err(|e| PipelineError::new("init-eig", e))?;
    let now = clock.elapsed().as_secs_f64();
    stage_seconds.push(("init-eig", now - last));
    last = now;

    let (compressed, enn_report) = enn_rectify(
        &init,
        k,
        config.i_size_for(k),
        config.enn_max_iters,
        config.enn_tol,
    )
    .map_err(|e| PipelineError::new("rectify", e))?;
    let now = clock.elapsed().as_secs_f64();
    stage_seconds.push(("rectify", now - last));
    last = now;

    let model = law(&compressed, k).map_err(|e| PipelineError::new("infer", e))?;
    let now = clock.elapsed().as_secs_f64();
    stage_seconds.push(("infer", now - last));

    Ok(LrJsmfOutcome {
        model,
        compressed,
        enn_report,
        stage_seconds,
    })
}

fn degenerate_rows(d: ArrayView1<f64>) -> Vec<bool> {
    let max_d = d.iter().fold(0.0f64, |m, &v| m.max(v));
    d.iter()
        .map(|&v| v <= DEGENERACY_FLOOR * max_d)
        .collect()
}

fn flagged(degenerate: &[bool]) -> Vec<usize> {
    degenerate
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

fn mask_marginal(d: ArrayView1<f64>, degenerate: &[bool]) -> Array1<f64> {
    Array1::from_iter(
        d.iter()
            .zip(degenerate)
            .map(|(&v, &bad)| if bad { 0.0 } else { v }),
    )
}

fn uniformize_degenerate(rows: &mut Array2<f64>, degenerate: &[bool]) {
    let k = rows.ncols();
    for (i, &bad) in degenerate.iter().enumerate() {
        if bad {
            rows.row_mut(i).fill(1.0 / k as f64);
        }
    }
}

// Column-pivoted QR over candidate columns, with degenerate candidates zeroed
// out so they can never be selected.
fn select_anchors(
    candidates_t: ArrayView2<f64>,
    k: usize,
    degenerate: &[bool],
) -> Result<PivotSet, InferError> {
    let has_degenerate = degenerate.iter().any(|&b| b);
    let outcome = if has_degenerate {
        let mut masked = candidates_t.to_owned();
        for (j, &bad) in degenerate.iter().enumerate() {
            if bad {
                masked.column_mut(j).fill(0.0);
            }
        }
        column_pivoted_qr(masked.view(), k)
    } else {
        column_pivoted_qr(candidates_t, k)
    };
    if !outcome.complete {
        return Err(InferError::RankDeficient {
            found: outcome.pivots.len(),
            needed: k,
        });
    }
    Ok(outcome.pivots)
}

fn gather_rows(m: ArrayView2<f64>, indices: &[usize]) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((indices.len(), m.ncols()));
    for (r, &i) in indices.iter().enumerate() {
        out.row_mut(r).assign(&m.row(i));
    }
    out
}

fn gather_square(m: &Array2<f64>, indices: &[usize]) -> Array2<f64> {
    let k = indices.len();
    let mut out = Array2::<f64>::zeros((k, k));
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate() {
            out[[a, b]] = m[[i, j]];
        }
    }
    out
}

// A = B_S^{-1} C_SS B_S^{-1}, symmetrized against roundoff asymmetry.
fn recover_correlation(
    word_topic: &Array2<f64>,
    anchors: &[usize],
    c_ss: &Array2<f64>,
) -> Result<Array2<f64>, InferError> {
    let b_s = gather_square_from_rows(word_topic, anchors);
    let m = solve(b_s.view(), c_ss.view()).map_err(InferError::SingularAnchors)?;
    let a_t = solve(b_s.t().to_owned().view(), m.t().to_owned().view())
        .map_err(InferError::SingularAnchors)?;
    let a = a_t.t().to_owned();
    let at = a.t().to_owned();
    Ok((&a + &at) * 0.5)
}

fn gather_square_from_rows(m: &Array2<f64>, indices: &[usize]) -> Array2<f64> {
    let k = indices.len();
    let mut out = Array2::<f64>::zeros((k, k));
    for (r, &i) in indices.iter().enumerate() {
        out.row_mut(r).assign(&m.row(i));
    }
    out
}
