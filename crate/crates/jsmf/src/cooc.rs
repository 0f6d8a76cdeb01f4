//! The unbiased joint-stochastic co-occurrence estimator, in dense and
//! matrix-free forms.
//!
//! For a corpus with scaled documents `hhat_m = h_m / sqrt(n_m (n_m - 1) M)`
//! the estimator is `C = Hhat Hhat^T - diag(Hhat_diag)` with
//! `Hhat_diag_i = sum_m h_im / (n_m (n_m - 1) M)`. The raw estimator sums to
//! one but can carry negative diagonal entries; rectification owns the
//! repair, so nothing is clamped here.

use crate::corpus::BagOfWords;
use crate::linalg::SymOp;
use crate::rectify::CompressedCooccurrence;
use ndarray::{Array1, Array2, ArrayView1};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CoocError {
    #[error("document {doc} has {tokens} token(s); the estimator needs at least 2")]
    ShortDocument { doc: usize, tokens: u64 },
    #[error("dimension mismatch: operator is {expected}, vector is {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Dense N x N symmetric co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCooccurrence {
    pub matrix: Array2<f64>,
}

impl DenseCooccurrence {
    /// Wraps a square matrix, symmetrizing it as `(C + C^T) / 2` so the
    /// eigensolvers downstream see exact symmetry.
    pub fn new(matrix: Array2<f64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "co-occurrence must be square");
        let t = matrix.t().to_owned();
        Self {
            matrix: (&matrix + &t) * 0.5,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Matrix-free co-occurrence over the scaled document factors; products cost
/// O(nnz) and the N x N matrix is never formed.
#[derive(Debug, Clone)]
pub struct ImplicitCooccurrence {
    /// Scaled document vectors, document-major: `(word, hhat value)` pairs.
    docs: Vec<Vec<(usize, f64)>>,
    diag: Array1<f64>,
    n: usize,
}

impl ImplicitCooccurrence {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.docs.iter().map(|d| d.len()).sum()
    }
}

/// One of the three operator representations of a co-occurrence matrix.
#[derive(Debug, Clone, Copy)]
pub enum CoocView<'a> {
    Dense(&'a DenseCooccurrence),
    Implicit(&'a ImplicitCooccurrence),
    Compressed(&'a CompressedCooccurrence),
}

impl CoocView<'_> {
    pub fn dim(&self) -> usize {
        match self {
            CoocView::Dense(c) => c.n(),
            CoocView::Implicit(c) => c.n,
            CoocView::Compressed(c) => c.n(),
        }
    }

    /// Row sums of the represented matrix.
    pub fn row_sums(&self) -> Array1<f64> {
        let ones = Array1::from_elem(self.dim(), 1.0);
        apply_unchecked(self, ones.view())
    }

    /// A single entry of the represented matrix. Dense and compressed views
    /// answer in O(1) / O(K); the implicit view scans its documents.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            CoocView::Dense(c) => c.matrix[[i, j]],
            CoocView::Implicit(c) => {
                let mut acc = 0.0;
                for doc in &c.docs {
                    let a = doc
                        .binary_search_by_key(&i, |&(w, _)| w)
                        .ok()
                        .map(|p| doc[p].1);
                    if let Some(hi) = a {
                        let b = if i == j {
                            Some(hi)
                        } else {
                            doc.binary_search_by_key(&j, |&(w, _)| w)
                                .ok()
                                .map(|p| doc[p].1)
                        };
                        if let Some(hj) = b {
                            acc += hi * hj;
                        }
                    }
                }
                if i == j {
                    acc -= c.diag[i];
                }
                acc
            }
            CoocView::Compressed(c) => {
                c.factor.row(i).dot(&c.factor.row(j)) + c.correction.get(i, j) + c.shift
            }
        }
    }

    /// Materializes the given rows of the represented matrix.
    pub fn rows(&self, indices: &[usize]) -> Array2<f64> {
        let n = self.dim();
        let mut out = Array2::<f64>::zeros((indices.len(), n));
        match self {
            CoocView::Dense(c) => {
                for (r, &i) in indices.iter().enumerate() {
                    out.row_mut(r).assign(&c.matrix.row(i));
                }
            }
            CoocView::Implicit(c) => {
                for (r, &i) in indices.iter().enumerate() {
                    let mut row = out.row_mut(r);
                    for doc in &c.docs {
                        if let Ok(p) = doc.binary_search_by_key(&i, |&(w, _)| w) {
                            let hi = doc[p].1;
                            for &(w, h) in doc {
                                row[w] += hi * h;
                            }
                        }
                    }
                    row[i] -= c.diag[i];
                }
            }
            CoocView::Compressed(c) => {
                for (r, &i) in indices.iter().enumerate() {
                    let yi = c.factor.row(i);
                    let mut row = out.row_mut(r);
                    for (j, val) in c.factor.dot(&yi).iter().enumerate() {
                        row[j] = *val + c.shift;
                    }
                    c.correction.add_row_to(i, &mut row);
                }
            }
        }
        out
    }
}

impl SymOp for CoocView<'_> {
    fn dim(&self) -> usize {
        CoocView::dim(self)
    }

    fn apply_vec(&self, x: ArrayView1<f64>) -> Array1<f64> {
        apply_unchecked(self, x)
    }
}

/// Builds the dense estimator. Errors on any document shorter than 2 tokens.
pub fn build_dense(corpus: &BagOfWords) -> Result<DenseCooccurrence, CoocError> {
    let n = corpus.num_words();
    let m = corpus.num_docs() as f64;
    let mut c = Array2::<f64>::zeros((n, n));
    for (doc_idx, (doc, &len)) in corpus
        .docs()
        .iter()
        .zip(corpus.doc_lengths())
        .enumerate()
    {
        if len < 2 {
            return Err(CoocError::ShortDocument {
                doc: doc_idx,
                tokens: len,
            });
        }
        let denom = len as f64 * (len as f64 - 1.0) * m;
        let inv = 1.0 / denom;
        for &(wi, ci) in doc {
            for &(wj, cj) in doc {
                c[[wi, wj]] += ci as f64 * cj as f64 * inv;
            }
            c[[wi, wi]] -= ci as f64 * inv;
        }
    }
    Ok(DenseCooccurrence::new(c))
}

/// Builds the matrix-free estimator over scaled document vectors.
pub fn build_implicit(corpus: &BagOfWords) -> Result<ImplicitCooccurrence, CoocError> {
    let n = corpus.num_words();
    let m = corpus.num_docs() as f64;
    let mut docs = Vec::with_capacity(corpus.num_docs());
    let mut diag = Array1::<f64>::zeros(n);
    for (doc_idx, (doc, &len)) in corpus
        .docs()
        .iter()
        .zip(corpus.doc_lengths())
        .enumerate()
    {
        if len < 2 {
            return Err(CoocError::ShortDocument {
                doc: doc_idx,
                tokens: len,
            });
        }
        let denom = len as f64 * (len as f64 - 1.0) * m;
        let scale = denom.sqrt().recip();
        let scaled: Vec<(usize, f64)> = doc
            .iter()
            .map(|&(w, c)| (w, c as f64 * scale))
            .collect();
        for &(w, c) in doc {
            diag[w] += c as f64 / denom;
        }
        docs.push(scaled);
    }
    Ok(ImplicitCooccurrence { docs, diag, n })
}

/// Matrix-vector product of the represented matrix with `x`.
pub fn apply(view: &CoocView, x: ArrayView1<f64>) -> Result<Array1<f64>, CoocError> {
    if x.len() != view.dim() {
        return Err(CoocError::DimensionMismatch {
            expected: view.dim(),
            actual: x.len(),
        });
    }
    Ok(apply_unchecked(view, x))
}

fn apply_unchecked(view: &CoocView, x: ArrayView1<f64>) -> Array1<f64> {
    match view {
        CoocView::Dense(c) => c.matrix.dot(&x),
        CoocView::Implicit(c) => {
            let mut out = Array1::<f64>::zeros(c.n);
            for doc in &c.docs {
                let mut s = 0.0;
                for &(w, h) in doc {
                    s += h * x[w];
                }
                if s != 0.0 {
                    for &(w, h) in doc {
                        out[w] += h * s;
                    }
                }
            }
            for i in 0..c.n {
                out[i] -= c.diag[i] * x[i];
            }
            out
        }
        CoocView::Compressed(c) => c.apply(x),
    }
}

/// Verdict and extremes from the joint-stochasticity check.
#[derive(Debug, Clone)]
pub struct StochasticReport {
    pub ok: bool,
    pub min_entry: f64,
    pub min_at: (usize, usize),
    pub total: f64,
}

/// True iff the minimum entry is at least `-tol` and the total sum is within
/// `tol` of one. The report carries the violating extremes either way.
pub fn is_joint_stochastic(c: &DenseCooccurrence, tol: f64) -> StochasticReport {
    let mut min_entry = f64::INFINITY;
    let mut min_at = (0, 0);
    let mut total = 0.0;
    for ((i, j), &v) in c.matrix.indexed_iter() {
        total += v;
        if v < min_entry {
            min_entry = v;
            min_at = (i, j);
        }
    }
    StochasticReport {
        ok: min_entry >= -tol && (total - 1.0).abs() <= tol,
        min_entry,
        min_at,
        total,
    }
}
