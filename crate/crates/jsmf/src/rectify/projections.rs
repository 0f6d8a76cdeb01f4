//! Dense alternating-projection rectification and its three projections.

use super::RectifyError;
use crate::cooc::{CoocView, DenseCooccurrence};
use crate::linalg::{default_max_basis, truncated_eig, EigenPair};
use ndarray::Array2;
use std::time::Instant;

// Inner eigensolve settings for the PSD projection.
const EIG_TOL: f64 = 1e-9;

/// Nearest rank-K positive semidefinite matrix in Frobenius norm, built from
/// the clamped top-K eigenpairs.
pub fn project_psd(c: &DenseCooccurrence, k: usize) -> Result<DenseCooccurrence, RectifyError> {
    let out = truncated_eig(&CoocView::Dense(c), k, EIG_TOL, default_max_basis(k))?;
    Ok(reconstruct_clamped(&out.pair))
}

pub(crate) fn reconstruct_clamped(pair: &EigenPair) -> DenseCooccurrence {
    let k = pair.rank();
    let mut scaled = pair.basis.clone();
    for j in 0..k {
        let lam = pair.eigenvalues[j].max(0.0);
        scaled.column_mut(j).mapv_inplace(|v| v * lam);
    }
    DenseCooccurrence::new(scaled.dot(&pair.basis.t()))
}

/// Adds the uniform shift that makes all entries sum to one. A second
/// correction pass mops up the summation roundoff so the unit total holds at
/// any input scale.
pub fn project_nor(c: &DenseCooccurrence) -> DenseCooccurrence {
    let n2 = (c.n() * c.n()) as f64;
    let total: f64 = c.matrix.iter().sum();
    let mut out = c.matrix.mapv(|v| v + (1.0 - total) / n2);
    let residual: f64 = out.iter().sum::<f64>() - 1.0;
    if residual != 0.0 {
        out.mapv_inplace(|v| v - residual / n2);
    }
    DenseCooccurrence { matrix: out }
}

/// Entrywise clamp at zero.
pub fn project_nn(c: &DenseCooccurrence) -> DenseCooccurrence {
    DenseCooccurrence {
        matrix: c.matrix.mapv(|v| v.max(0.0)),
    }
}

#[derive(Debug, Clone)]
pub struct ApIterRecord {
    pub iteration: usize,
    /// Relative Frobenius change of the iterate.
    pub change: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ApReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_change: f64,
    /// |sum - 1| of the output (the NN clamp can move the sum off one).
    pub sum_deviation: f64,
    /// Relative Frobenius distance of the output to its own clamped top-K
    /// reconstruction.
    pub psd_residual: f64,
    pub records: Vec<ApIterRecord>,
}

/// Cycles PSD_K -> NOR -> NN on the dense matrix until the relative
/// Frobenius change drops to `tol` or `max_iters` is reached. The output is
/// exactly entrywise nonnegative because every cycle ends on the clamp.
/// Non-convergence is reported, not fatal.
pub fn ap_rectify(
    c: &DenseCooccurrence,
    k: usize,
    max_iters: usize,
    tol: f64,
) -> Result<(DenseCooccurrence, ApReport), RectifyError> {
    let start = Instant::now();
    let mut current = c.clone();
    let mut records = Vec::new();
    let mut converged = false;
    let mut final_change = f64::INFINITY;

    for iteration in 1..=max_iters {
        let psd = project_psd(&current, k)?;
        let next = project_nn(&project_nor(&psd));
        let change = rel_change(&next.matrix, &current.matrix);
        records.push(ApIterRecord {
            iteration,
            change,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        current = next;
        final_change = change;
        if change <= tol {
            converged = true;
            break;
        }
    }

    let total: f64 = current.matrix.iter().sum();
    let psd_residual = {
        let out = truncated_eig(&CoocView::Dense(&current), k, EIG_TOL, default_max_basis(k))?;
        let norm_sq: f64 = current.matrix.iter().map(|v| v * v).sum();
        let captured: f64 = out
            .pair
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0) * l.max(0.0))
            .sum();
        ((norm_sq - captured).max(0.0)).sqrt() / norm_sq.sqrt().max(1e-300)
    };
    let iterations = records.len();
    Ok((
        current,
        ApReport {
            iterations,
            converged,
            final_change,
            sum_deviation: (total - 1.0).abs(),
            psd_residual,
            records,
        },
    ))
}

fn rel_change(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let mut diff = 0.0;
    let mut base = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        diff += (x - y) * (x - y);
        base += y * y;
    }
    if base <= 1e-300 {
        if diff <= 1e-300 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff / base).sqrt()
    }
}
