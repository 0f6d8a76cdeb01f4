//! PALM rectification: proximal alternating linearized minimization of
//! `J(X, Y) = 0.5 ||C - X Y^T||_F^2 + (s/2) ||X - Y||_F^2` subject to
//! `X >= 0, Y >= 0`.
//!
//! Step sizes are the exact Lipschitz moduli of the partial gradients,
//! `L1(Y) = ||Y^T Y + s I||_2` and `L2(X) = ||X^T X + s I||_2`, inflated by a
//! safety factor `gamma > 1`, which is what the convergence theory requires.

use super::{CompressedCooccurrence, RectifyError, SparseSym};
use crate::cooc::{CoocView, DenseCooccurrence};
use crate::linalg::{default_max_basis, spectral_norm_sym, truncated_eig};
use ndarray::{Array2, ArrayView2};

const EIG_TOL: f64 = 1e-9;

/// Final PALM iterates and the recorded objective values, one per completed
/// iteration (the infeasible spectral initializer is not recorded).
#[derive(Debug, Clone)]
pub struct PalmState {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub s: f64,
    pub gamma: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `J(X, Y)` evaluated through K x K Gram identities; no N x N temporary.
pub fn palm_objective(c: &DenseCooccurrence, x: ArrayView2<f64>, y: ArrayView2<f64>, s: f64) -> f64 {
    let c_norm_sq: f64 = c.matrix.iter().map(|v| v * v).sum();
    let cx = c.matrix.dot(&x);
    let cross: f64 = y.iter().zip(cx.iter()).map(|(a, b)| a * b).sum();
    let xtx = x.t().dot(&x);
    let yty = y.t().dot(&y);
    let prod_sq: f64 = xtx
        .iter()
        .zip(yty.t().iter())
        .map(|(a, b)| a * b)
        .sum();
    let coupling: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    0.5 * (c_norm_sq - 2.0 * cross + prod_sq) + 0.5 * s * coupling
}

/// Partial gradients of `J`: `grad_X = (X Y^T - C) Y + s (X - Y)` and
/// `grad_Y = (Y X^T - C) X + s (Y - X)`.
pub fn palm_gradients(
    c: &DenseCooccurrence,
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    s: f64,
) -> (Array2<f64>, Array2<f64>) {
    let yty = y.t().dot(&y);
    let xtx = x.t().dot(&x);
    let cy = c.matrix.dot(&y);
    let cx = c.matrix.dot(&x);
    let gx = x.dot(&yty) - &cy + (&x.to_owned() - &y.to_owned()) * s;
    let gy = y.dot(&xtx) - &cx + (&y.to_owned() - &x.to_owned()) * s;
    (gx, gy)
}

/// PALM rectification of a dense symmetric co-occurrence. Returns the
/// compressed output (exactly nonnegative, so no correction and no shift)
/// along with the optimizer state.
pub fn palm_rectify(
    c: &DenseCooccurrence,
    k: usize,
    s: f64,
    gamma: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(CompressedCooccurrence, PalmState), RectifyError> {
    if gamma <= 1.0 {
        return Err(RectifyError::InvalidGamma(gamma));
    }
    if s <= 0.0 {
        return Err(RectifyError::InvalidCoupling(s));
    }
    let n = c.n();
    let init = truncated_eig(&CoocView::Dense(c), k, EIG_TOL, default_max_basis(k))?.pair;
    // U sqrt(Lambda) is undefined for negative eigenvalues; clamp first
    let mut x = init.basis.clone();
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        let scale = init.eigenvalues[j].max(0.0).sqrt();
        col.mapv_inplace(|v| v * scale);
    }
    let mut y = x.clone();

    let eye_scale = |g: &Array2<f64>| {
        let mut m = g.clone();
        for i in 0..k {
            m[[i, i]] += s;
        }
        spectral_norm_sym(m.view())
    };

    let mut objective_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iters {
        let yty = y.t().dot(&y);
        let c_t = gamma * eye_scale(&yty);
        let cy = c.matrix.dot(&y);
        let gx = x.dot(&yty) - &cy + (&x - &y) * s;
        x.zip_mut_with(&gx, |xv, gv| *xv = (*xv - gv / c_t).max(0.0));

        let xtx = x.t().dot(&x);
        let d_t = gamma * eye_scale(&xtx);
        let cx = c.matrix.dot(&x);
        let gy = y.dot(&xtx) - &cx + (&y - &x) * s;
        let mut y_next = y.clone();
        y_next.zip_mut_with(&gy, |yv, gv| *yv = (*yv - gv / d_t).max(0.0));

        let change = rel_change(&y_next, &y);
        y = y_next;
        iterations += 1;
        objective_trace.push(palm_objective(c, x.view(), y.view(), s));
        if change <= tol {
            converged = true;
            break;
        }
    }

    let compressed = CompressedCooccurrence {
        factor: y.clone(),
        correction: SparseSym::empty(n),
        shift: 0.0,
        epsilon_bound: 0.0,
    };
    Ok((
        compressed,
        PalmState {
            x,
            y,
            s,
            gamma,
            objective_trace,
            iterations,
            converged,
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
