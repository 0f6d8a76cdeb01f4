//! Rectification: forcing empirical co-occurrence onto the model-consistent
//! manifold (rank-K positive semidefinite, entries summing to one, entrywise
//! nonnegative).
//!
//! Three routes are provided. [`ap_rectify`] is the dense alternating
//! projection baseline. [`enn_rectify`] keeps a sparse-plus-low-rank
//! representation `Y Y^T + E + r e e^T` whose entries are certified to be at
//! least `-epsilon_bound`, never materializing N x N. [`palm_rectify`]
//! minimizes `||C - X Y^T||_F` with nonnegativity on the factors directly.

mod enn;
mod palm;
mod projections;
mod sparse;

pub use enn::{
    build_correction, enn_rectify, enn_rectify_with, heavy_rows, EnnIterRecord, EnnIterate,
    EnnReport,
};
pub use palm::{palm_gradients, palm_objective, palm_rectify, PalmState};
pub use projections::{ap_rectify, project_nn, project_nor, project_psd, ApIterRecord, ApReport};
pub use sparse::SparseSym;

use crate::linalg::LinalgError;
use ndarray::{Array1, Array2, ArrayView1};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum RectifyError {
    #[error("eigensolver failed: {0}")]
    Eig(#[from] LinalgError),
    #[error("eigensolver failed at rectification iteration {iteration}: {source}")]
    EigAtIteration {
        iteration: usize,
        source: LinalgError,
    },
    #[error("step-safety factor gamma must exceed 1, got {0}")]
    InvalidGamma(f64),
    #[error("coupling weight s must be positive, got {0}")]
    InvalidCoupling(f64),
}

/// Sparse-plus-low-rank co-occurrence: the represented matrix is
/// `Y Y^T + E + r e e^T`, entrywise at least `-epsilon_bound`.
#[derive(Debug, Clone)]
pub struct CompressedCooccurrence {
    /// N x K factor from the clamped eigendecomposition.
    pub factor: Array2<f64>,
    /// Symmetric nonnegative sparse correction.
    pub correction: SparseSym,
    /// Uniform shift restoring unit total mass.
    pub shift: f64,
    /// Certified entrywise lower bound (as a magnitude; entries are
    /// >= -epsilon_bound).
    pub epsilon_bound: f64,
}

impl CompressedCooccurrence {
    pub fn n(&self) -> usize {
        self.factor.nrows()
    }

    pub fn k(&self) -> usize {
        self.factor.ncols()
    }

    /// `Y (Y^T x) + E x + r (e^T x) e` in O(NK + nnz(E) + N).
    pub fn apply(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let ytx = self.factor.t().dot(&x);
        let mut out = self.factor.dot(&ytx);
        self.correction.apply_add(x, &mut out);
        if self.shift != 0.0 {
            let tot = self.shift * x.sum();
            out.mapv_inplace(|v| v + tot);
        }
        out
    }

    /// Dense expansion for desk-scale audits.
    pub fn expand(&self) -> Array2<f64> {
        let mut c = self.factor.dot(&self.factor.t());
        self.correction.add_to_dense(&mut c);
        if self.shift != 0.0 {
            c.mapv_inplace(|v| v + self.shift);
        }
        c
    }
}
