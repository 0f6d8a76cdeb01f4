//! Epsilon non-negative rectification: simultaneous rectification and
//! compression into `Y Y^T + E + r e e^T`.
//!
//! The clamp that would destroy low rank is replaced by a sparse correction
//! over the screened pairs. Screening keeps the rows of Y with the largest
//! 2-norms: by Cauchy-Schwarz, every entry formed from two unscreened rows is
//! bounded in magnitude by epsilon = (largest excluded row norm)^2, so fixing
//! only the screened pairs certifies every entry to be at least -epsilon.

use super::{CompressedCooccurrence, RectifyError, SparseSym};
use crate::cooc::CoocView;
use crate::linalg::{default_max_basis, truncated_eig, EigenPair};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use std::time::Instant;

const EIG_TOL: f64 = 1e-9;

/// Indices of the `count` rows of `y` with the largest squared 2-norms (ties
/// to the lower index), plus the certified bound epsilon = the largest
/// excluded squared row norm (zero when nothing is excluded). Indices come
/// back ascending.
pub fn heavy_rows(y: ndarray::ArrayView2<f64>, count: usize) -> (Vec<usize>, f64) {
    assert!(count >= 1, "heavy_rows: count must be positive");
    let n = y.nrows();
    let mut norms: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let row = y.row(i);
            (row.dot(&row), i)
        })
        .collect();
    norms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let take = count.min(n);
    let mut indices: Vec<usize> = norms[..take].iter().map(|&(_, i)| i).collect();
    indices.sort_unstable();
    let epsilon = if take < n { norms[take].0 } else { 0.0 };
    (indices, epsilon)
}

/// Sparse symmetric correction over the screened pairs: for every pair
/// `(i, j)` with `i` or `j` screened, `E_ij = max(-Y_i . Y_j, 0)`. The
/// checked region of `Y Y^T + E` becomes exactly nonnegative.
pub fn build_correction(y: ndarray::ArrayView2<f64>, screened: &[usize]) -> SparseSym {
    let n = y.nrows();
    let mut in_set = vec![false; n];
    for &i in screened {
        in_set[i] = true;
    }
    let triples: Vec<(u32, u32, f64)> = screened
        .par_iter()
        .map(|&i| {
            let yi = y.row(i);
            let mut local = Vec::new();
            for j in 0..n {
                if j == i {
                    continue;
                }
                // pairs inside the screened set are handled once, by the
                // smaller index; outside pairs belong to the screened row
                if in_set[j] && j < i {
                    continue;
                }
                let dot = yi.dot(&y.row(j));
                if dot < 0.0 {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    local.push((a as u32, b as u32, -dot));
                }
            }
            local
        })
        .flatten()
        .collect();
    SparseSym::from_triples(n, triples)
}

/// One materialized ENN cycle, handed to observers for audits.
pub struct EnnIterate<'a> {
    pub cycle: usize,
    pub factor: &'a Array2<f64>,
    pub correction: &'a SparseSym,
    pub shift: f64,
    pub epsilon_bound: f64,
}

#[derive(Debug, Clone)]
pub struct EnnIterRecord {
    pub iteration: usize,
    /// Relative Frobenius change of Y against the previous cycle after
    /// aligning column signs; NaN on the first cycle.
    pub residual: f64,
    pub nnz_correction: usize,
    pub shift: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct EnnReport {
    /// Number of eigensolve/update cycles performed past the initialization.
    pub iterations: usize,
    pub converged: bool,
    pub records: Vec<EnnIterRecord>,
}

/// Epsilon non-negative rectification from an initial eigendecomposition of
/// the raw co-occurrence operator (dense or implicit).
pub fn enn_rectify(
    init: &EigenPair,
    k: usize,
    i_size: usize,
    max_iters: usize,
    tol: f64,
) -> Result<(CompressedCooccurrence, EnnReport), RectifyError> {
    enn_rectify_with(init, k, i_size, max_iters, tol, |_| {})
}

/// Same as [`enn_rectify`] with a per-cycle observer; audits hook in here.
pub fn enn_rectify_with(
    init: &EigenPair,
    k: usize,
    i_size: usize,
    max_iters: usize,
    tol: f64,
    mut observer: impl FnMut(&EnnIterate),
) -> Result<(CompressedCooccurrence, EnnReport), RectifyError> {
    assert!(k >= 1 && init.rank() >= k, "init must carry at least k pairs");
    let n = init.basis.nrows();
    let start = Instant::now();
    let mut pair = truncate_pair(init, k);
    let mut prev_factor: Option<Array2<f64>> = None;
    let mut records = Vec::new();

    for cycle in 1..=(max_iters + 1) {
        let factor = clamped_sqrt_factor(&pair);
        let (screened, epsilon_bound) = heavy_rows(factor.view(), i_size);
        let correction = build_correction(factor.view(), &screened);
        let col_sums = factor.t().dot(&Array1::from_elem(n, 1.0));
        let shift =
            (1.0 - col_sums.dot(&col_sums) - correction.total_sum()) / (n as f64 * n as f64);

        let residual = prev_factor
            .as_ref()
            .map(|p| aligned_rel_change(&factor, p))
            .unwrap_or(f64::NAN);
        records.push(EnnIterRecord {
            iteration: cycle,
            residual,
            nnz_correction: correction.nnz(),
            shift,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        observer(&EnnIterate {
            cycle,
            factor: &factor,
            correction: &correction,
            shift,
            epsilon_bound,
        });

        let compressed = CompressedCooccurrence {
            factor,
            correction,
            shift,
            epsilon_bound,
        };
        if residual.is_finite() && residual <= tol {
            return Ok((
                compressed,
                EnnReport {
                    iterations: cycle - 1,
                    converged: true,
                    records,
                },
            ));
        }
        if cycle == max_iters + 1 {
            return Ok((
                compressed,
                EnnReport {
                    iterations: max_iters,
                    converged: false,
                    records,
                },
            ));
        }

        let view = CoocView::Compressed(&compressed);
        pair = truncated_eig(&view, k, EIG_TOL, default_max_basis(k))
            .map_err(|source| RectifyError::EigAtIteration {
                iteration: cycle,
                source,
            })?
            .pair;
        prev_factor = Some(compressed.factor);
    }
    unreachable!("loop returns from within");
}

fn truncate_pair(pair: &EigenPair, k: usize) -> EigenPair {
    EigenPair {
        basis: pair.basis.slice(ndarray::s![.., ..k]).to_owned(),
        eigenvalues: pair.eigenvalues.slice(ndarray::s![..k]).to_owned(),
    }
}

/// `Y = U (Lambda^+)^{1/2}`.
pub(crate) fn clamped_sqrt_factor(pair: &EigenPair) -> Array2<f64> {
    let mut y = pair.basis.clone();
    for (j, mut col) in y.columns_mut().into_iter().enumerate() {
        let scale = pair.eigenvalues[j].max(0.0).sqrt();
        col.mapv_inplace(|v| v * scale);
    }
    y
}

pub(crate) fn aligned_rel_change(current: &Array2<f64>, previous: &Array2<f64>) -> f64 {
    let mut diff_sq = 0.0;
    let mut base_sq = 0.0;
    for j in 0..current.ncols() {
        let cur = current.column(j);
        let prev = previous.column(j);
        let sign = if cur.dot(&prev) < 0.0 { -1.0 } else { 1.0 };
        for (a, b) in cur.iter().zip(prev.iter()) {
            let d = sign * a - b;
            diff_sq += d * d;
            base_sq += b * b;
        }
    }
    if base_sq <= 1e-300 {
        if diff_sq <= 1e-300 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff_sq / base_sq).sqrt()
    }
}
