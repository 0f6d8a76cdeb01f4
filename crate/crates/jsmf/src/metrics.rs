//! Evaluation metrics: recovery/approximation/dominancy errors, specificity,
//! dissimilarity, anchor-hull volumes, NPMI, MST incoherence, and the
//! prominent/characteristic word lists.
//!
//! Every metric has a dense path and, where the input allows it, a compressed
//! path that works through K-dimensional Gram identities without
//! materializing N x N.

use crate::cooc::{CoocView, DenseCooccurrence};
use crate::infer::TopicModel;
use crate::linalg::column_pivoted_qr;
use crate::rectify::CompressedCooccurrence;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

const DEGENERACY_FLOOR: f64 = 1e-12;
/// Stand-in for log(0) hull volumes, flagged wherever it is used.
pub const NEG_INF_CLAMP: f64 = -1e6;

#[derive(Error, Debug)]
pub enum MetricsError {
    #[error("correlation matrix is zero")]
    ZeroCorrelation,
    #[error("anchor row {0} is entirely zero")]
    DegenerateAnchorRow(usize),
}

/// Row-normalized co-occurrence, either materialized or as `Ybar Y^T`.
#[derive(Debug, Clone)]
pub enum RowNormalized {
    Dense { cbar: Array2<f64> },
    Compressed { ybar: Array2<f64>, y: Array2<f64> },
}

impl RowNormalized {
    pub fn from_dense(c: &DenseCooccurrence) -> Self {
        let n = c.n();
        let d = c.matrix.dot(&Array1::from_elem(n, 1.0));
        let floor = DEGENERACY_FLOOR * d.iter().fold(0.0f64, |m, &v| m.max(v));
        let mut cbar = c.matrix.clone();
        for i in 0..n {
            if d[i] <= floor {
                cbar.row_mut(i).fill(0.0);
            } else {
                let di = d[i];
                cbar.row_mut(i).mapv_inplace(|v| v / di);
            }
        }
        RowNormalized::Dense { cbar }
    }

    /// Normalizes through the factor alone (`d = Y (Y^T e)`), matching what
    /// low-rank inference consumes.
    pub fn from_compressed(c: &CompressedCooccurrence) -> Self {
        let n = c.n();
        let y = c.factor.clone();
        let d = y.dot(&y.t().dot(&Array1::from_elem(n, 1.0)));
        let floor = DEGENERACY_FLOOR * d.iter().fold(0.0f64, |m, &v| m.max(v));
        let mut ybar = y.clone();
        for i in 0..n {
            if d[i] <= floor {
                ybar.row_mut(i).fill(0.0);
            } else {
                let di = d[i];
                ybar.row_mut(i).mapv_inplace(|v| v / di);
            }
        }
        RowNormalized::Compressed { ybar, y }
    }

    pub fn n(&self) -> usize {
        match self {
            RowNormalized::Dense { cbar } => cbar.nrows(),
            RowNormalized::Compressed { ybar, .. } => ybar.nrows(),
        }
    }

    /// One row of the normalized matrix, materialized.
    pub fn row(&self, i: usize) -> Array1<f64> {
        match self {
            RowNormalized::Dense { cbar } => cbar.row(i).to_owned(),
            RowNormalized::Compressed { ybar, y } => y.dot(&ybar.row(i)),
        }
    }

    pub fn rows(&self, indices: &[usize]) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((indices.len(), self.n()));
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).assign(&self.row(i));
        }
        out
    }

    fn frobenius(&self) -> f64 {
        match self {
            RowNormalized::Dense { cbar } => cbar.iter().map(|v| v * v).sum::<f64>().sqrt(),
            RowNormalized::Compressed { ybar, y } => {
                let gram = y.t().dot(y);
                let yg = ybar.dot(&gram);
                yg.iter()
                    .zip(ybar.iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .max(0.0)
                    .sqrt()
            }
        }
    }
}

/// Mean row reconstruction error of the anchor representation, relative to
/// the Frobenius norm of the row-normalized matrix. Streams rows in the
/// compressed path.
pub fn relative_recovery(
    source: &RowNormalized,
    responsibility: ArrayView2<f64>,
    anchors: &[usize],
) -> f64 {
    let n = source.n();
    let denom = source.frobenius().max(1e-300);
    let total = match source {
        RowNormalized::Dense { cbar } => {
            let anchor_rows = gather_rows(cbar.view(), anchors);
            let mut sum = 0.0;
            for i in 0..n {
                let approx = responsibility.row(i).dot(&anchor_rows);
                let mut res_sq = 0.0;
                for (a, b) in cbar.row(i).iter().zip(approx.iter()) {
                    res_sq += (a - b) * (a - b);
                }
                sum += res_sq.sqrt();
            }
            sum
        }
        RowNormalized::Compressed { ybar, y } => {
            let gram = y.t().dot(y);
            let anchor_embed = gather_rows(ybar.view(), anchors);
            let mut sum = 0.0;
            for i in 0..n {
                let combo = responsibility.row(i).dot(&anchor_embed);
                let mut diff = ybar.row(i).to_owned();
                diff.zip_mut_with(&combo, |a, &b| *a -= b);
                let res_sq = diff.dot(&gram.dot(&diff)).max(0.0);
                sum += res_sq.sqrt();
            }
            sum
        }
    };
    total / n as f64 / denom
}

/// What the factorization is compared against in the approximation error.
#[derive(Debug, Clone, Copy)]
pub enum ApproxSource<'a> {
    Dense(&'a DenseCooccurrence),
    Compressed(&'a CompressedCooccurrence),
}

/// `||C - B A B^T||_F / ||C||_F`. The compressed path evaluates both norms
/// through K x K Gram identities plus exact sparse terms.
pub fn relative_approximation(
    source: ApproxSource,
    word_topic: ArrayView2<f64>,
    correlation: ArrayView2<f64>,
) -> f64 {
    match source {
        ApproxSource::Dense(c) => {
            let ba = word_topic.dot(&correlation);
            let model = ba.dot(&word_topic.t());
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, b) in c.matrix.iter().zip(model.iter()) {
                num += (a - b) * (a - b);
                den += a * a;
            }
            (num / den.max(1e-300)).sqrt()
        }
        ApproxSource::Compressed(yc) => {
            let y = &yc.factor;
            let n = y.nrows() as f64;
            let e = &yc.correction;
            let r = yc.shift;
            let ones = Array1::from_elem(y.nrows(), 1.0);
            let col_sums = y.t().dot(&ones);

            // ||C||^2 for C = Y Y^T + E + r e e^T
            let yty = y.t().dot(y);
            let mut c_norm_sq = yty.iter().map(|v| v * v).sum::<f64>();
            c_norm_sq += e.frobenius_sq();
            c_norm_sq += r * r * n * n;
            let mut cross_ye = 0.0;
            for &(i, j, v) in e.entries() {
                cross_ye += v * y.row(i as usize).dot(&y.row(j as usize));
            }
            c_norm_sq += 2.0 * (2.0 * cross_ye);
            c_norm_sq += 2.0 * r * col_sums.dot(&col_sums);
            c_norm_sq += 2.0 * r * e.total_sum();

            // <C, B A B^T>
            let p = y.t().dot(&word_topic); // K x K
            let pa = p.dot(&correlation);
            let inner_y: f64 = pa.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
            let ba = word_topic.dot(&correlation); // N x K
            let mut inner_e = 0.0;
            for &(i, j, v) in e.entries() {
                inner_e += v * ba.row(i as usize).dot(&word_topic.row(j as usize));
            }
            inner_e *= 2.0;
            let u = word_topic.t().dot(&ones);
            let inner_r = r * u.dot(&correlation.dot(&u));
            let inner = inner_y + inner_e + inner_r;

            // ||B A B^T||^2 = tr(M A M A) with M = B^T B
            let m = word_topic.t().dot(&word_topic);
            let ma = m.dot(&correlation);
            let model_sq: f64 = ma.dot(&ma).diag().sum();

            let num = (c_norm_sq - 2.0 * inner + model_sq).max(0.0);
            (num / c_norm_sq.max(1e-300)).sqrt()
        }
    }
}

/// `(1/K) sum_k A_kk / ||A||_F`; low values mean mass moved off the diagonal
/// into cross-topic correlation.
pub fn relative_dominancy(correlation: ArrayView2<f64>) -> Result<f64, MetricsError> {
    let k = correlation.nrows() as f64;
    let fro = correlation.iter().map(|v| v * v).sum::<f64>().sqrt();
    if fro <= 0.0 {
        return Err(MetricsError::ZeroCorrelation);
    }
    Ok(correlation.diag().sum() / k / fro)
}

/// Mean KL divergence of the topic columns from the corpus unigram
/// distribution. Zero probabilities contribute nothing; a positive topic
/// entry over a zero unigram entry floors the unigram at 1e-12 and flags.
pub fn specificity(word_topic: ArrayView2<f64>, unigram: ArrayView1<f64>) -> (f64, bool) {
    let (n, k) = word_topic.dim();
    assert_eq!(n, unigram.len());
    let mut total = 0.0;
    let mut flagged = false;
    for t in 0..k {
        for i in 0..n {
            let b = word_topic[[i, t]];
            if b <= 0.0 {
                continue;
            }
            let mut u = unigram[i];
            if u <= 0.0 {
                u = 1e-12;
                flagged = true;
            }
            total += b * (b / u).ln();
        }
    }
    (total / k as f64, flagged)
}

/// For each topic, the fraction of its `top_n` words absent from the union
/// of every other topic's `top_n` set, averaged over topics.
pub fn dissimilarity(word_topic: ArrayView2<f64>, top_n: usize) -> f64 {
    let k = word_topic.ncols();
    assert!(k >= 2, "dissimilarity needs at least two topics");
    let tops: Vec<Vec<usize>> = (0..k)
        .map(|t| top_indices(word_topic.column(t), top_n, None))
        .collect();
    let mut score = 0.0;
    for t in 0..k {
        let mut union: std::collections::HashSet<usize> = std::collections::HashSet::new();
        for (other, top) in tops.iter().enumerate() {
            if other != t {
                union.extend(top.iter().copied());
            }
        }
        let outside = tops[t].iter().filter(|w| !union.contains(w)).count();
        score += outside as f64 / tops[t].len() as f64;
    }
    score / k as f64
}

/// Volume of the (K-1)-simplex spanned by K points given as rows:
/// `sqrt(det(G^T G)) / (K-1)!` with `G` the edge matrix from the first point.
/// Affinely dependent points give zero.
pub fn hull_volume(points: ArrayView2<f64>) -> f64 {
    match log_hull_volume(points) {
        Some(lv) => lv.exp(),
        None => 0.0,
    }
}

/// Log-domain hull volume; `None` marks affinely dependent points.
pub fn log_hull_volume(points: ArrayView2<f64>) -> Option<f64> {
    let k = points.nrows();
    assert!(k >= 2, "hull volume needs at least two points");
    let first = points.row(0);
    let mut gram = Array2::<f64>::zeros((k - 1, k - 1));
    let edges: Vec<Array1<f64>> = (1..k).map(|i| &points.row(i) - &first).collect();
    for a in 0..k - 1 {
        for b in a..k - 1 {
            let v = edges[a].dot(&edges[b]);
            gram[[a, b]] = v;
            gram[[b, a]] = v;
        }
    }
    let half_logdet = logdet_psd(&mut gram)?;
    let log_factorial: f64 = (1..k).map(|i| (i as f64).ln()).sum();
    Some(0.5 * half_logdet - log_factorial)
}

// log det of a symmetric PSD matrix via Cholesky; None when it is singular
// at working precision.
fn logdet_psd(a: &mut Array2<f64>) -> Option<f64> {
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let mut logdet = 0.0;
    for j in 0..n {
        let mut diag = a[[j, j]];
        for p in 0..j {
            diag -= a[[j, p]] * a[[j, p]];
        }
        if diag <= 1e-14 * scale {
            return None;
        }
        let root = diag.sqrt();
        a[[j, j]] = root;
        logdet += 2.0 * root.ln();
        for i in (j + 1)..n {
            let mut v = a[[i, j]];
            for p in 0..j {
                v -= a[[i, p]] * a[[j, p]];
            }
            a[[i, j]] = v / root;
        }
    }
    Some(logdet)
}

/// Log volume of the anchor hull minus the mean log volume of hulls found by
/// pivoted QR on matrices with rows drawn uniformly from the N-simplex.
/// Positive values mean the anchors span more than chance. Deterministic
/// given `seed`; a degenerate anchor hull clamps to [`NEG_INF_CLAMP`] and
/// flags.
pub fn log_relative_volume(
    source: &RowNormalized,
    anchors: &[usize],
    num_random: usize,
    seed: u64,
) -> (f64, bool) {
    let k = anchors.len();
    assert!(k >= 2, "log_relative_volume needs at least two anchors");
    let n = source.n();
    let anchor_points = source.rows(anchors);
    let log_anchor = log_hull_volume(anchor_points.view());

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut baseline_sum = 0.0;
    let mut baseline_count = 0usize;
    let mut flagged = false;
    for _ in 0..num_random {
        let random = random_row_stochastic(n, &mut rng);
        let pivots = column_pivoted_qr(random.t(), k);
        if pivots.pivots.len() < k {
            flagged = true;
            continue;
        }
        let rows = gather_rows(random.view(), &pivots.pivots.indices);
        match log_hull_volume(rows.view()) {
            Some(lv) => {
                baseline_sum += lv;
                baseline_count += 1;
            }
            None => flagged = true,
        }
    }
    let baseline = if baseline_count > 0 {
        baseline_sum / baseline_count as f64
    } else {
        0.0
    };
    match log_anchor {
        Some(lv) => (lv - baseline, flagged),
        None => (NEG_INF_CLAMP, true),
    }
}

// N x N matrix with each row uniform on the simplex (normalized Exp(1)).
fn random_row_stochastic(n: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
    let mut m = Array2::<f64>::zeros((n, n));
    for mut row in m.rows_mut() {
        let mut total = 0.0;
        for v in row.iter_mut() {
            let u: f64 = rng.random_range(0.0..1.0);
            *v = -(1.0 - u).ln();
            total += *v;
        }
        row.mapv_inplace(|v| v / total);
    }
    m
}

/// Normalized pointwise mutual information in [-1, 1]. Conventions:
/// non-positive joints give -1, independence gives 0, a zero marginal gives
/// -1 with a flag.
pub fn npmi(view: &CoocView, i: usize, j: usize, d: ArrayView1<f64>) -> (f64, bool) {
    assert_ne!(i, j, "npmi is defined for distinct words");
    let (di, dj) = (d[i], d[j]);
    if di <= 0.0 || dj <= 0.0 {
        return (-1.0, true);
    }
    let c_ij = view.entry(i, j);
    if c_ij <= 0.0 {
        return (-1.0, false);
    }
    if c_ij >= 1.0 {
        return (1.0, false);
    }
    let pmi = (c_ij / (di * dj)).ln();
    let value = pmi / (-c_ij.ln());
    (value.clamp(-1.0, 1.0), false)
}

/// Total weight of the minimum spanning tree over the given words, with edge
/// weights `(1 - NPMI(i, j)) / 2`. Duplicate words merge; fewer than two
/// distinct words cost zero.
pub fn mst_incoherence(view: &CoocView, words: &[usize], d: ArrayView1<f64>) -> f64 {
    let mut nodes: Vec<usize> = words.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let n = nodes.len();
    if n < 2 {
        return 0.0;
    }
    let mut weights = Array2::<f64>::zeros((n, n));
    for a in 0..n {
        for b in (a + 1)..n {
            let (value, _) = npmi(view, nodes[a], nodes[b], d);
            let w = 0.5 * (1.0 - value);
            weights[[a, b]] = w;
            weights[[b, a]] = w;
        }
    }
    mst_cost(&weights)
}

// Prim's algorithm on a dense weight matrix.
pub(crate) fn mst_cost(weights: &Array2<f64>) -> f64 {
    let n = weights.nrows();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (next == usize::MAX || best[v] < best[next]) {
                next = v;
            }
        }
        in_tree[next] = true;
        total += best[next];
        for v in 0..n {
            if !in_tree[v] && weights[[next, v]] < best[v] {
                best[v] = weights[[next, v]];
            }
        }
    }
    total
}

/// Indices of the `top_n` largest entries of topic `k`'s column, descending,
/// ties to the lower index.
pub fn prominent_words(word_topic: ArrayView2<f64>, topic: usize, top_n: usize) -> Vec<usize> {
    top_indices(word_topic.column(topic), top_n, None)
}

/// Indices of the `top_n` entries of the anchor's normalized co-occurrence
/// row, excluding the anchor itself.
pub fn characteristic_words(
    source: &RowNormalized,
    anchor: usize,
    top_n: usize,
) -> Result<Vec<usize>, MetricsError> {
    let row = source.row(anchor);
    if row.iter().all(|&v| v == 0.0) {
        return Err(MetricsError::DegenerateAnchorRow(anchor));
    }
    Ok(top_indices(row.view(), top_n, Some(anchor)))
}

fn top_indices(values: ArrayView1<f64>, top_n: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len())
        .filter(|&i| Some(i) != exclude)
        .collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    order.truncate(top_n);
    order
}

fn gather_rows(m: ArrayView2<f64>, indices: &[usize]) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((indices.len(), m.ncols()));
    for (r, &i) in indices.iter().enumerate() {
        out.row_mut(r).assign(&m.row(i));
    }
    out
}

/// The rectified statistics a report is computed against.
#[derive(Debug, Clone, Copy)]
pub enum RectifiedSource<'a> {
    Dense(&'a DenseCooccurrence),
    Compressed(&'a CompressedCooccurrence),
}

impl<'a> RectifiedSource<'a> {
    pub fn view(&self) -> CoocView<'a> {
        match self {
            RectifiedSource::Dense(c) => CoocView::Dense(c),
            RectifiedSource::Compressed(c) => CoocView::Compressed(c),
        }
    }

    fn row_normalized(&self) -> RowNormalized {
        match self {
            RectifiedSource::Dense(c) => RowNormalized::from_dense(c),
            RectifiedSource::Compressed(c) => RowNormalized::from_compressed(c),
        }
    }

    fn approx(&self) -> ApproxSource<'a> {
        match self {
            RectifiedSource::Dense(c) => ApproxSource::Dense(c),
            RectifiedSource::Compressed(c) => ApproxSource::Compressed(c),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Words listed per topic (prominent and characteristic).
    pub word_list_len: usize,
    /// Top-word budget feeding each topic's MST graph (per list).
    pub mst_words: usize,
    /// Top-word window for the dissimilarity metric.
    pub dissimilarity_top: usize,
    pub num_random_hulls: usize,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            word_list_len: 7,
            mst_words: 7,
            dissimilarity_top: 20,
            num_random_hulls: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TopicSummary {
    pub topic: usize,
    pub anchor: usize,
    pub prominent: Vec<usize>,
    pub characteristic: Vec<usize>,
    pub mst_incoherence: f64,
}

#[derive(Debug, Clone)]
pub struct TopicReport {
    pub topics: Vec<TopicSummary>,
    pub relative_recovery: f64,
    pub relative_approximation: f64,
    pub relative_dominancy: f64,
    pub specificity: f64,
    pub dissimilarity: f64,
    pub log_relative_volume: f64,
    pub flags: Vec<String>,
}

/// Computes the full evaluation report for a model against the rectified
/// statistics it was inferred from. NPMI edges use the same rectified view;
/// [`topic_report_with_npmi_view`] switches them onto another operator (for
/// example the raw estimator).
pub fn topic_report(
    source: RectifiedSource,
    model: &TopicModel,
    options: &ReportOptions,
) -> Result<TopicReport, MetricsError> {
    topic_report_with_npmi_view(source, source.view(), model, options)
}

/// [`topic_report`] with the NPMI/MST graph evaluated on a caller-chosen
/// co-occurrence view.
pub fn topic_report_with_npmi_view(
    source: RectifiedSource,
    npmi_view: CoocView,
    model: &TopicModel,
    options: &ReportOptions,
) -> Result<TopicReport, MetricsError> {
    let mut flags = Vec::new();
    let normalized = source.row_normalized();
    let view = source.view();
    let k = model.num_topics();

    // unigram = row sums of the rectified matrix, renormalized
    let mut row_sums = view.row_sums();
    let mut clamped = false;
    for v in row_sums.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-12 {
                clamped = true;
            }
            *v = 0.0;
        }
    }
    if clamped {
        flags.push("unigram: negative row sums clamped to zero".to_string());
    }
    let total = row_sums.sum().max(1e-300);
    let unigram = row_sums.mapv(|v| v / total);

    let (specificity_value, floored) = specificity(model.word_topic.view(), unigram.view());
    if floored {
        flags.push("specificity: unigram floored on support mismatch".to_string());
    }

    let anchors = &model.anchors.indices;
    let recovery = relative_recovery(&normalized, model.responsibility.view(), anchors);
    let approximation = relative_approximation(
        source.approx(),
        model.word_topic.view(),
        model.correlation.view(),
    );
    let dominancy = relative_dominancy(model.correlation.view())?;
    let dissim = if k >= 2 {
        dissimilarity(model.word_topic.view(), options.dissimilarity_top)
    } else {
        1.0
    };
    let (volume, volume_flagged) = if k >= 2 {
        log_relative_volume(&normalized, anchors, options.num_random_hulls, options.seed)
    } else {
        (0.0, true)
    };
    if volume_flagged {
        flags.push("log_relative_volume: degenerate hull encountered".to_string());
    }

    let marginal = npmi_view.row_sums();
    let mut topics = Vec::with_capacity(k);
    for topic in 0..k {
        let anchor = anchors[topic];
        let prominent = prominent_words(model.word_topic.view(), topic, options.word_list_len);
        let characteristic = characteristic_words(&normalized, anchor, options.word_list_len)?;
        let pw_mst = prominent_words(model.word_topic.view(), topic, options.mst_words);
        let cw_mst = characteristic_words(&normalized, anchor, options.mst_words)?;
        let mut graph_words = pw_mst;
        graph_words.extend(cw_mst);
        let incoherence = mst_incoherence(&npmi_view, &graph_words, marginal.view());
        topics.push(TopicSummary {
            topic,
            anchor,
            prominent,
            characteristic,
            mst_incoherence: incoherence,
        });
    }

    Ok(TopicReport {
        topics,
        relative_recovery: recovery,
        relative_approximation: approximation,
        relative_dominancy: dominancy,
        specificity: specificity_value,
        dissimilarity: dissim,
        log_relative_volume: volume,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dominancy_hand_cases() {
        let k = 4;
        let a = Array2::from_diag(&Array1::from_elem(k, 1.0 / k as f64));
        let v = relative_dominancy(a.view()).unwrap();
        assert!((v - 1.0 / (k as f64).sqrt()).abs() < 1e-12);

        let off = array![[0.0, 0.5], [0.5, 0.0]];
        assert_eq!(relative_dominancy(off.view()).unwrap(), 0.0);

        let single = array![[1.0]];
        assert!((relative_dominancy(single.view()).unwrap() - 1.0).abs() < 1e-15);

        assert!(relative_dominancy(Array2::zeros((2, 2)).view()).is_err());
    }

    #[test]
    fn specificity_hand_cases() {
        let unigram = array![0.5, 0.5];
        let same = array![[0.5, 0.5], [0.5, 0.5]];
        let (v, flagged) = specificity(same.view(), unigram.view());
        assert!(v.abs() < 1e-15);
        assert!(!flagged);

        let peaked = array![[1.0], [0.0]];
        let (v, flagged) = specificity(peaked.view(), unigram.view());
        assert!((v - 2.0f64.ln()).abs() < 1e-12);
        assert!(!flagged);

        let mismatched = array![[1.0], [0.0]];
        let zero_unigram = array![0.0, 1.0];
        let (_, flagged) = specificity(mismatched.view(), zero_unigram.view());
        assert!(flagged);
    }

    #[test]
    fn dissimilarity_hand_cases() {
        let identical = array![[0.6, 0.6], [0.4, 0.4], [0.0, 0.0]];
        assert_eq!(dissimilarity(identical.view(), 2), 0.0);

        let disjoint = array![[0.6, 0.0], [0.4, 0.0], [0.0, 0.6], [0.0, 0.4]];
        assert_eq!(dissimilarity(disjoint.view(), 2), 1.0);

        // top-2 sets {0,1} and {1,2}
        let overlap = array![[0.6, 0.0], [0.4, 0.6], [0.0, 0.4]];
        assert_eq!(dissimilarity(overlap.view(), 2), 0.5);
    }

    #[test]
    fn hull_volume_hand_cases() {
        let segment = array![[1.0, 0.0], [0.0, 1.0]];
        assert!((hull_volume(segment.view()) - 2.0f64.sqrt()).abs() < 1e-12);

        let coincident = array![[0.3, 0.7], [0.3, 0.7]];
        assert_eq!(hull_volume(coincident.view()), 0.0);

        let simplex3 = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((hull_volume(simplex3.view()) - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn hull_volume_rigid_motion_invariant() {
        let pts = array![[0.1, 0.2, 0.0], [0.4, 0.1, 0.3], [0.0, 0.5, 0.2]];
        let base = hull_volume(pts.view());
        // rotate about z by 30 degrees and translate
        let (s, c) = (30.0f64.to_radians().sin(), 30.0f64.to_radians().cos());
        let rot = array![[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let mut moved = pts.dot(&rot.t());
        for mut row in moved.rows_mut() {
            row += &array![1.0, -2.0, 0.5];
        }
        assert!((hull_volume(moved.view()) - base).abs() < 1e-9);
    }

    #[test]
    fn npmi_conventions() {
        let c = DenseCooccurrence::new(array![[0.0, 0.5], [0.5, 0.0]]);
        let view = CoocView::Dense(&c);
        let d = array![0.5, 0.5];
        // perfect co-occurrence
        let (v, _) = npmi(&view, 0, 1, d.view());
        assert!((v - 1.0).abs() < 1e-12);

        // independence: C_ij = d_i d_j
        let c = DenseCooccurrence::new(array![[0.25, 0.25], [0.25, 0.25]]);
        let view = CoocView::Dense(&c);
        let (v, _) = npmi(&view, 0, 1, d.view());
        assert!(v.abs() < 1e-12);

        // zero joint
        let c = DenseCooccurrence::new(array![[0.5, 0.0], [0.0, 0.5]]);
        let view = CoocView::Dense(&c);
        let (v, flagged) = npmi(&view, 0, 1, d.view());
        assert_eq!(v, -1.0);
        assert!(!flagged);

        // zero marginal flags
        let (v, flagged) = npmi(&view, 0, 1, array![0.0, 0.5].view());
        assert_eq!(v, -1.0);
        assert!(flagged);
    }

    #[test]
    fn mst_hand_cases() {
        let mut w = Array2::<f64>::zeros((3, 3));
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    w[[a, b]] = 0.5;
                }
            }
        }
        assert!((mst_cost(&w) - 1.0).abs() < 1e-15);

        let mut w = Array2::<f64>::zeros((3, 3));
        w[[0, 1]] = 0.1;
        w[[1, 0]] = 0.1;
        w[[0, 2]] = 0.2;
        w[[2, 0]] = 0.2;
        w[[1, 2]] = 0.9;
        w[[2, 1]] = 0.9;
        assert!((mst_cost(&w) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn mst_incoherence_zero_for_perfect_pairs() {
        // NPMI(0, 1) = 1, so the single MST edge costs zero
        let c = DenseCooccurrence::new(array![[0.0, 0.5], [0.5, 0.0]]);
        let view = CoocView::Dense(&c);
        let d = array![0.5, 0.5];
        let cost = mst_incoherence(&view, &[0, 1, 1, 0], d.view());
        assert!(cost.abs() < 1e-12);
    }

    #[test]
    fn mst_invariant_under_relabeling() {
        let c = DenseCooccurrence::new(array![
            [0.10, 0.05, 0.01, 0.02],
            [0.05, 0.20, 0.03, 0.01],
            [0.01, 0.03, 0.15, 0.04],
            [0.02, 0.01, 0.04, 0.13]
        ]);
        let view = CoocView::Dense(&c);
        let d = view.row_sums();
        let a = mst_incoherence(&view, &[0, 1, 2], d.view());
        let b = mst_incoherence(&view, &[2, 0, 1], d.view());
        assert_eq!(a, b);
    }

    #[test]
    fn prominent_words_ordering_and_ties() {
        let b = array![[0.5, 0.2], [0.3, 0.5], [0.2, 0.3]];
        assert_eq!(prominent_words(b.view(), 0, 2), vec![0, 1]);
        let tie = array![[0.5], [0.5]];
        assert_eq!(prominent_words(tie.view(), 0, 1), vec![0]);
        assert_eq!(prominent_words(b.view(), 1, 10), vec![1, 2, 0]);
    }

    #[test]
    fn characteristic_words_exclude_anchor() {
        let c = DenseCooccurrence::new(array![
            [0.00, 0.25, 0.15, 0.10],
            [0.25, 0.0, 0.0, 0.0],
            [0.15, 0.0, 0.0, 0.0],
            [0.10, 0.0, 0.0, 0.0]
        ]);
        let source = RowNormalized::from_dense(&c);
        let cw = characteristic_words(&source, 0, 2).unwrap();
        assert_eq!(cw, vec![1, 2]);
        assert!(!characteristic_words(&source, 0, 4).unwrap().contains(&0));
    }

    #[test]
    fn log_relative_volume_self_comparison_is_zero() {
        // take the baseline procedure's own hull as the anchor set
        let n = 12;
        let k = 3;
        let seed = 99;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let random = random_row_stochastic(n, &mut rng);
        let pivots = column_pivoted_qr(random.t(), k).pivots.indices;
        let source = RowNormalized::Dense {
            cbar: random.clone(),
        };
        let (value, flagged) = log_relative_volume(&source, &pivots, 1, seed);
        assert!(!flagged);
        assert!(value.abs() < 1e-12, "self comparison gave {value}");
    }

    #[test]
    fn log_relative_volume_scaling_shift() {
        let n = 10;
        let k = 4;
        let seed = 5;
        let mut rng = ChaCha20Rng::seed_from_u64(1234);
        let base = random_row_stochastic(n, &mut rng);
        let anchors: Vec<usize> = vec![0, 3, 5, 7];
        let source = RowNormalized::Dense { cbar: base.clone() };
        let (v1, _) = log_relative_volume(&source, &anchors, 3, seed);
        let doubled = RowNormalized::Dense {
            cbar: base.mapv(|v| 2.0 * v),
        };
        let (v2, _) = log_relative_volume(&doubled, &anchors, 3, seed);
        let expect = (k as f64 - 1.0) * 2.0f64.ln();
        assert!((v2 - v1 - expect).abs() < 1e-9, "shift {} vs {}", v2 - v1, expect);
    }

    #[test]
    fn recovery_zero_when_all_rows_are_anchors() {
        let c = DenseCooccurrence::new(array![[0.3, 0.2], [0.2, 0.3]]);
        let source = RowNormalized::from_dense(&c);
        let bbreve = array![[1.0, 0.0], [0.0, 1.0]];
        let v = relative_recovery(&source, bbreve.view(), &[0, 1]);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn approximation_trivial_cases() {
        let c = DenseCooccurrence::new(array![[0.25, 0.25], [0.25, 0.25]]);
        // exact: C = B A B^T with B = [1,1]/..., single topic
        let b = array![[0.5], [0.5]];
        let a = array![[1.0]];
        let v = relative_approximation(ApproxSource::Dense(&c), b.view(), a.view());
        assert!(v < 1e-12);

        let zero_b = Array2::<f64>::zeros((2, 1));
        let v = relative_approximation(ApproxSource::Dense(&c), zero_b.view(), a.view());
        assert!((v - 1.0).abs() < 1e-12);
    }
}
