//! Thin QR factorization by Householder reflections.

use ndarray::{Array1, Array2, ArrayView2};

/// Thin QR factors: `q` is N x K with orthonormal columns, `r` is K x K upper
/// triangular with nonnegative diagonal.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: Array2<f64>,
    pub r: Array2<f64>,
}

/// Thin QR of an N x K matrix (K <= N). Rank deficiency is permitted and
/// shows up as zero rows in `r`.
pub fn thin_qr(a: ArrayView2<f64>) -> QrFactors {
    let (n, k) = a.dim();
    assert!(k <= n, "thin_qr: need K <= N, got {n} x {k}");
    let mut work = a.to_owned();
    // Householder vectors, one per column; `None` marks a skipped (zero) column.
    let mut reflectors: Vec<Option<Array1<f64>>> = Vec::with_capacity(k);

    for j in 0..k {
        let mut norm_sq = 0.0;
        for i in j..n {
            norm_sq += work[[i, j]] * work[[i, j]];
        }
        let norm = norm_sq.sqrt();
        if norm <= 1e-300 {
            reflectors.push(None);
            for i in j..n {
                work[[i, j]] = 0.0;
            }
            continue;
        }
        let alpha = if work[[j, j]] >= 0.0 { -norm } else { norm };
        let mut v = Array1::<f64>::zeros(n);
        v[j] = work[[j, j]] - alpha;
        for i in (j + 1)..n {
            v[i] = work[[i, j]];
        }
        let vtv = v.dot(&v);
        if vtv > 0.0 {
            let scale = 2.0 / vtv;
            for col in j..k {
                let mut dot = 0.0;
                for i in j..n {
                    dot += v[i] * work[[i, col]];
                }
                let f = scale * dot;
                for i in j..n {
                    work[[i, col]] -= f * v[i];
                }
            }
        }
        work[[j, j]] = alpha;
        for i in (j + 1)..n {
            work[[i, j]] = 0.0;
        }
        reflectors.push(Some(v));
    }

    let mut r = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            r[[i, j]] = work[[i, j]];
        }
    }

    // q = H_0 H_1 ... H_{k-1} applied to the first k identity columns
    let mut q = Array2::<f64>::zeros((n, k));
    for j in 0..k {
        q[[j, j]] = 1.0;
    }
    for j in (0..k).rev() {
        if let Some(v) = &reflectors[j] {
            let vtv = v.dot(v);
            if vtv > 0.0 {
                let scale = 2.0 / vtv;
                for col in 0..k {
                    let mut dot = 0.0;
                    for i in j..n {
                        dot += v[i] * q[[i, col]];
                    }
                    let f = scale * dot;
                    for i in j..n {
                        q[[i, col]] -= f * v[i];
                    }
                }
            }
        }
    }

    for j in 0..k {
        if r[[j, j]] < 0.0 {
            for col in j..k {
                r[[j, col]] = -r[[j, col]];
            }
            for i in 0..n {
                q[[i, j]] = -q[[i, j]];
            }
        }
    }

    QrFactors { q, r }
}
