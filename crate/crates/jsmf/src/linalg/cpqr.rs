//! Greedy column-pivoted QR subset selection.
//!
//! Each step picks the column whose residual, after projecting off the span
//! of the already-selected columns, has the largest 2-norm. This is the
//! pivot rule whose selections are preserved under orthogonal embeddings,
//! which is what lets the K-dimensional low-rank path reproduce the dense
//! path's anchor words exactly.

use ndarray::{Array2, ArrayView2};

/// Ordered set of selected column indices (selection order preserved).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotSet {
    pub indices: Vec<usize>,
}

impl PivotSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PivotOutcome {
    pub pivots: PivotSet,
    /// False when the matrix ran out of rank before K pivots were found;
    /// `pivots` then holds the partial selection.
    pub complete: bool,
}

/// Selects `k` columns of `xt` (a D x N matrix) greedily by maximal residual
/// 2-norm. Ties break to the lower column index. Residual norms below 1e-12
/// stop the selection early with `complete = false`.
pub fn column_pivoted_qr(xt: ArrayView2<f64>, k: usize) -> PivotOutcome {
    let (d, n) = xt.dim();
    assert!(k <= n, "column_pivoted_qr: k = {k} exceeds column count {n}");
    let mut work: Array2<f64> = xt.to_owned();
    let mut picked = vec![false; n];
    let mut pivots = Vec::with_capacity(k);

    for _ in 0..k {
        let mut best = usize::MAX;
        let mut best_norm_sq = f64::NEG_INFINITY;
        for j in 0..n {
            if picked[j] {
                continue;
            }
            let col = work.column(j);
            let norm_sq = col.dot(&col);
            if norm_sq > best_norm_sq {
                best_norm_sq = norm_sq;
                best = j;
            }
        }
        if best == usize::MAX || best_norm_sq.sqrt() < 1e-12 {
            return PivotOutcome {
                pivots: PivotSet { indices: pivots },
                complete: false,
            };
        }
        picked[best] = true;
        pivots.push(best);

        let norm = best_norm_sq.sqrt();
        let q: Vec<f64> = work.column(best).iter().map(|&v| v / norm).collect();
        for j in 0..n {
            if picked[j] {
                continue;
            }
            let mut dot = 0.0;
            for i in 0..d {
                dot += q[i] * work[[i, j]];
            }
            if dot != 0.0 {
                for i in 0..d {
                    work[[i, j]] -= dot * q[i];
                }
            }
        }
        for i in 0..d {
            work[[i, best]] = 0.0;
        }
    }

    PivotOutcome {
        pivots: PivotSet { indices: pivots },
        complete: true,
    }
}
