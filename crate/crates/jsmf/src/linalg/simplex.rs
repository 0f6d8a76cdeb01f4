//! Euclidean projection onto the probability simplex and simplex-constrained
//! least squares.
//!
//! The least-squares solver handles N independent rows: each row of `x` is
//! approximated by a convex combination of the anchor rows `xs`. Rows are
//! independent, so they run in parallel; per-row results are pure functions
//! of the inputs and do not depend on scheduling.

use super::dense::spectral_norm_sym;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

const MAX_ITERS: usize = 500;
// Internal target is tighter than the contract so downstream dense/low-rank
// agreement tests have slack; rows are flagged only past the contract level.
const KKT_TARGET: f64 = 1e-9;
const KKT_CONTRACT: f64 = 1e-7;

/// Euclidean projection of `v` onto `{ p >= 0, sum p = 1 }`.
pub fn simplex_project(v: ArrayView1<f64>) -> Array1<f64> {
    let k = v.len();
    assert!(k > 0, "simplex_project: empty vector");
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &val) in sorted.iter().enumerate() {
        cumsum += val;
        let candidate = (cumsum - 1.0) / (j as f64 + 1.0);
        if val - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.mapv(|x| (x - theta).max(0.0))
}

/// Simplex-constrained least squares over all rows of `x`.
#[derive(Debug, Clone)]
pub struct SimplexLsOutcome {
    /// N x K row-stochastic coefficient matrix.
    pub coefficients: Array2<f64>,
    /// Rows that hit the iteration cap before reaching the KKT contract.
    pub capped_rows: Vec<usize>,
    /// Largest KKT residual over all rows at exit.
    pub max_kkt_residual: f64,
}

/// Diagnostic single-row solve used by property tests.
#[derive(Debug, Clone)]
pub struct SimplexRowSolve {
    pub coefficients: Array1<f64>,
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
}

/// Minimizes `||x_i - b xs||_2` over the probability simplex for every row
/// `x_i` of `x`. `xs` holds the K anchor rows (K x D); `x` is N x D.
///
/// Rows are renormalized to sum to one on exit. Rows that exhaust the
/// iteration cap are listed in `capped_rows`.
pub fn simplex_least_squares(x: ArrayView2<f64>, xs: ArrayView2<f64>) -> SimplexLsOutcome {
    let (n, d) = x.dim();
    let (k, d2) = xs.dim();
    assert_eq!(d, d2, "simplex_least_squares: row dimensions differ");
    assert!(k >= 1);

    // K x K Gram of the anchor rows; the step size comes from its largest
    // eigenvalue, the Lipschitz constant of every row's gradient.
    let gram = xs.dot(&xs.t());
    let lip = spectral_norm_sym(gram.view()).max(1e-300);
    let targets = x.dot(&xs.t()); // N x K, row i holds x_i xs^T

    let rows: Vec<(Array1<f64>, f64, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (b, _trace, kkt, capped) = solve_row(gram.view(), targets.row(i), lip, false);
            (b, kkt, capped)
        })
        .collect();

    let mut coefficients = Array2::<f64>::zeros((n, k));
    let mut capped_rows = Vec::new();
    let mut max_kkt = 0.0f64;
    for (i, (b, kkt, capped)) in rows.into_iter().enumerate() {
        coefficients.row_mut(i).assign(&b);
        max_kkt = max_kkt.max(kkt);
        if capped {
            capped_rows.push(i);
        }
    }
    SimplexLsOutcome {
        coefficients,
        capped_rows,
        max_kkt_residual: max_kkt,
    }
}

/// Solves one row and records the objective after every iteration.
pub fn solve_simplex_row_traced(
    x_row: ArrayView1<f64>,
    xs: ArrayView2<f64>,
) -> SimplexRowSolve {
    let gram = xs.dot(&xs.t());
    let lip = spectral_norm_sym(gram.view()).max(1e-300);
    let target = xs.dot(&x_row);
    let (coefficients, trace, kkt_residual, _) = solve_row(gram.view(), target.view(), lip, true);
    SimplexRowSolve {
        coefficients,
        objective_trace: trace,
        kkt_residual,
    }
}

// Monotone accelerated projected gradient (monotone FISTA). The objective is
// the variable part of 0.5 ||x_i - b xs||^2, namely 0.5 b G b^T - h . b; the
// omitted constant does not affect monotonicity or the minimizer.
fn solve_row(
    gram: ArrayView2<f64>,
    h: ArrayView1<f64>,
    lip: f64,
    trace: bool,
) -> (Array1<f64>, Vec<f64>, f64, bool) {
    let k = h.len();
    let f = |b: &Array1<f64>| 0.5 * b.dot(&gram.dot(b)) - h.dot(b);
    let grad = |b: &Array1<f64>| gram.dot(b) - &h;

    let mut current = Array1::from_elem(k, 1.0 / k as f64);
    let mut momentum = current.clone();
    let mut t = 1.0f64;
    let mut f_current = f(&current);
    let mut objective_trace = if trace { vec![f_current] } else { vec![] };
    let mut kkt = kkt_residual(&current, &grad(&current));
    let mut capped = false;

    for iter in 0..MAX_ITERS {
        if kkt <= KKT_TARGET {
            break;
        }
        if iter == MAX_ITERS - 1 {
            capped = kkt > KKT_CONTRACT;
        }
        let g = grad(&momentum);
        let candidate = simplex_project((&momentum - &(g / lip)).view());
        let f_candidate = f(&candidate);
        // take the candidate only if it does not increase the objective
        let (next, f_next) = if f_candidate <= f_current {
            (candidate.clone(), f_candidate)
        } else {
            (current.clone(), f_current)
        };
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        momentum = &next
            + &((&candidate - &next).mapv(|v| v * (t / t_next))
                + (&next - &current).mapv(|v| v * ((t - 1.0) / t_next)));
        current = next;
        f_current = f_next;
        t = t_next;
        if trace {
            objective_trace.push(f_current);
        }
        kkt = kkt_residual(&current, &grad(&current));
    }

    // exact unit row sum on exit
    let sum: f64 = current.sum();
    if sum > 0.0 {
        current.mapv_inplace(|v| v / sum);
    } else {
        current.fill(1.0 / k as f64);
    }
    (current, objective_trace, kkt, capped)
}

// Natural residual of the projected-gradient fixed point with unit step.
fn kkt_residual(b: &Array1<f64>, g: &Array1<f64>) -> f64 {
    let proj = simplex_project((b - g).view());
    (b - &proj).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
