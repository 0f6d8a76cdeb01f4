//! Small dense symmetric kernels used by the iterative solvers: cyclic
//! Jacobi eigendecomposition, the implicit-shift QL iteration for symmetric
//! tridiagonal matrices, and an LU solve with partial pivoting.

use super::LinalgError;
use ndarray::{Array1, Array2, ArrayView2};

/// Full eigendecomposition of a small symmetric matrix by cyclic Jacobi
/// sweeps. Returns eigenvalues descending and the matching eigenvector
/// columns.
pub(crate) fn jacobi_eig(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eig: matrix must be square");
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    if n <= 1 {
        return (m.diag().to_owned(), v);
    }

    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = c * mpj - s * mqj;
                    m[[q, j]] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

/// Largest eigenvalue of a small symmetric matrix.
pub(crate) fn spectral_norm_sym(a: ArrayView2<f64>) -> f64 {
    let (vals, _) = jacobi_eig(a);
    vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

// What the QL iteration accumulates alongside the eigenvalues.
enum Track {
    ValuesOnly,
    /// Last row of the eigenvector matrix: enough for Lanczos residual
    /// bounds |beta_m z_{m,i}| at O(m^2) cost.
    Bottom(Vec<f64>),
    Full(Array2<f64>),
}

impl Track {
    fn rotate(&mut self, i: usize, s: f64, c: f64) {
        match self {
            Track::ValuesOnly => {}
            Track::Bottom(row) => {
                let f = row[i + 1];
                row[i + 1] = s * row[i] + c * f;
                row[i] = c * row[i] - s * f;
            }
            Track::Full(z) => {
                for k in 0..z.nrows() {
                    let f = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * f;
                    z[[k, i]] = c * z[[k, i]] - s * f;
                }
            }
        }
    }
}

// Implicit QL iteration (the classic `tql2` scheme) on a symmetric
// tridiagonal matrix. `off[i]` couples rows i and i+1; zeros are legal and
// split the problem, which is how restarted Lanczos blocks arrive here.
// Eigenvalues come back descending, with the tracked vectors reordered to
// match.
fn tql_core(diag: &[f64], off: &[f64], mut track: Track) -> Result<(Vec<f64>, Track), LinalgError> {
    let m = diag.len();
    assert!(off.len() + 1 == m, "off-diagonal length mismatch");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 80 {
                return Err(LinalgError::EigFailed);
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;

            for i in (l..mm).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                track.rotate(i, s, c);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let tracked = match track {
        Track::ValuesOnly => Track::ValuesOnly,
        Track::Bottom(row) => Track::Bottom(order.iter().map(|&i| row[i]).collect()),
        Track::Full(z) => {
            let mut out = Array2::<f64>::zeros((m, m));
            for (dst, &src) in order.iter().enumerate() {
                out.column_mut(dst).assign(&z.column(src));
            }
            Track::Full(out)
        }
    };
    Ok((values, tracked))
}

/// Eigenvalues (descending) of a symmetric tridiagonal matrix, with the
/// eigenvector columns when `want_vectors` is set.
pub(crate) fn tridiag_eig(
    diag: &[f64],
    off: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Array2<f64>>), LinalgError> {
    if diag.is_empty() {
        return Ok((vec![], None));
    }
    let track = if want_vectors {
        Track::Full(Array2::<f64>::eye(diag.len()))
    } else {
        Track::ValuesOnly
    };
    let (values, tracked) = tql_core(diag, off, track)?;
    let vectors = match tracked {
        Track::Full(z) => Some(z),
        _ => None,
    };
    Ok((values, vectors))
}

/// Eigenvalues (descending) plus the bottom components of the eigenvectors.
pub(crate) fn tridiag_eig_bottom(
    diag: &[f64],
    off: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let m = diag.len();
    let mut row = vec![0.0; m];
    row[m - 1] = 1.0;
    let (values, tracked) = tql_core(diag, off, Track::Bottom(row))?;
    match tracked {
        Track::Bottom(row) => Ok((values, row)),
        _ => unreachable!(),
    }
}

/// Solves `A X = B` for a small square `A` by LU with partial pivoting.
pub(crate) fn solve(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<Array2<f64>, LinalgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "solve: A must be square");
    assert_eq!(n, b.nrows(), "solve: dimension mismatch");
    let mut lu = a.to_owned();
    let mut x = b.to_owned();
    let scale: f64 = lu.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);

    for col in 0..n {
        let mut piv = col;
        for row in (col + 1)..n {
            if lu[[row, col]].abs() > lu[[piv, col]].abs() {
                piv = row;
            }
        }
        if lu[[piv, col]].abs() <= 1e-14 * scale {
            return Err(LinalgError::SolveSingular(lu[[piv, col]].abs() / scale));
        }
        if piv != col {
            for j in 0..n {
                lu.swap([col, j], [piv, j]);
            }
            for j in 0..x.ncols() {
                x.swap([col, j], [piv, j]);
            }
        }
        let inv = 1.0 / lu[[col, col]];
        for row in (col + 1)..n {
            let factor = lu[[row, col]] * inv;
            lu[[row, col]] = factor;
            for j in (col + 1)..n {
                lu[[row, j]] -= factor * lu[[col, j]];
            }
            for j in 0..x.ncols() {
                x[[row, j]] -= factor * x[[col, j]];
            }
        }
    }
    for col in (0..n).rev() {
        let inv = 1.0 / lu[[col, col]];
        for j in 0..x.ncols() {
            x[[col, j]] *= inv;
            for row in 0..col {
                x[[row, j]] -= lu[[row, col]] * x[[col, j]];
            }
        }
    }
    Ok(x)
}
