//! Shared numerical kernels: truncated and randomized symmetric
//! eigendecomposition, thin and column-pivoted QR, and simplex-constrained
//! least squares.
//!
//! Everything operates on `f64` and is deterministic: iterative solvers seed
//! their internal randomness from fixed constants, and caller-provided seeds
//! fully determine randomized sketches.

mod cpqr;
mod dense;
mod lanczos;
mod qr;
mod randomized;
mod simplex;

pub use cpqr::{column_pivoted_qr, PivotOutcome, PivotSet};
pub use lanczos::{default_max_basis, truncated_eig, EigOutcome};
pub use qr::{thin_qr, QrFactors};
pub use randomized::randomized_eig;
pub use simplex::{
    simplex_least_squares, simplex_project, solve_simplex_row_traced, SimplexLsOutcome,
    SimplexRowSolve,
};

pub(crate) use dense::{solve, spectral_norm_sym};

use ndarray::{Array1, Array2, ArrayView1};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum LinalgError {
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("symmetric tridiagonal eigensolver failed to converge")]
    EigFailed,
    #[error("linear system is numerically singular (pivot ratio {0:.3e})")]
    SolveSingular(f64),
    #[error("randomized sketch cross-matrix is ill-conditioned")]
    SketchIllConditioned,
}

/// A symmetric linear operator given by its matrix-vector product.
///
/// Implementations must be symmetric; the eigensolvers silently assume it.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    fn apply_vec(&self, x: ArrayView1<f64>) -> Array1<f64>;
}

/// Any square `ndarray` matrix acts as an operator (assumed symmetric).
impl SymOp for Array2<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_vec(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.dot(&x)
    }
}

/// Orthonormal basis and eigenvalues of a truncated symmetric
/// eigendecomposition. Eigenvalues are sorted descending by algebraic value
/// and `basis` columns follow the same order.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// N x K matrix with orthonormal columns.
    pub basis: Array2<f64>,
    /// Length-K eigenvalues, descending.
    pub eigenvalues: Array1<f64>,
}

impl EigenPair {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub(crate) fn l2_norm(x: ArrayView1<f64>) -> f64 {
    x.dot(&x).sqrt()
}

/// Flips the sign of each column so its largest-magnitude entry is positive.
/// Ties break to the lower row index. Stabilizes eigenvector orientation.
pub(crate) fn fix_column_signs(m: &mut Array2<f64>) {
    for mut col in m.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}
