//! Shared test oracles. Everything here is deliberately independent of the
//! library's solver paths: the dense eigensolver is a self-contained Jacobi
//! sweep, the simplex oracle is a grid search, and matching is brute force.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Full eigendecomposition of a symmetric matrix by plain cyclic Jacobi.
/// Returns eigenvalues descending with matching eigenvector columns.
pub fn dense_eig_oracle(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _ in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q] ] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
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
                    let (mip, miq) = (m[[i, p]], m[[i, q]]);
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for j in 0..n {
                    let (mpj, mqj) = (m[[p, j]], m[[q, j]]);
                    m[[p, j]] = c * mpj - s * mqj;
                    m[[q, j]] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let (vip, viq) = (v[[i, p]], v[[i, q]]);
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

/// Best objective of `||x - (t, 1-t) xs||^2` over the 1-simplex by grid
/// search at the given step.
pub fn simplex_grid_oracle(x: ArrayView1<f64>, xs: ArrayView2<f64>, step: f64) -> f64 {
    assert_eq!(xs.nrows(), 2);
    let mut best = f64::INFINITY;
    let mut t = 0.0;
    while t <= 1.0 + 1e-12 {
        let mut obj = 0.0;
        for j in 0..x.len() {
            let r = x[j] - (t * xs[[0, j]] + (1.0 - t) * xs[[1, j]]);
            obj += r * r;
        }
        best = best.min(obj);
        t += step;
    }
    best
}

/// Random symmetric matrix with entries in [-1, 1].
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let m = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0f64));
    let t = m.t().to_owned();
    (&m + &t) * 0.5
}

/// Random nonnegative separable factor: the first `k` rows are scaled
/// coordinate directions (pure anchors), the rest arbitrary nonnegative
/// rows. Scaled so the represented matrix sums to one.
pub fn separable_factor(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut y = Array2::<f64>::zeros((n, k));
    for a in 0..k {
        y[[a, a]] = rng.random_range(0.5..1.5f64);
    }
    for i in k..n {
        let scale = rng.random_range(0.2..1.0f64);
        for j in 0..k {
            y[[i, j]] = scale * rng.random_range(0.0..1.0f64);
        }
    }
    let col_sums = y.t().dot(&Array1::from_elem(n, 1.0));
    let total: f64 = col_sums.dot(&col_sums);
    y.mapv(|v| v / total.sqrt())
}

/// Sum over topics of the L1 distance between matched columns, divided by K,
/// minimized over all K! column permutations.
pub fn column_matched_l1(estimate: &Array2<f64>, truth: &Array2<f64>) -> f64 {
    let k = truth.ncols();
    assert!(k <= 8, "brute-force matching only");
    assert_eq!(estimate.ncols(), k);
    let mut cost = Array2::<f64>::zeros((k, k));
    for a in 0..k {
        for b in 0..k {
            let mut l1 = 0.0;
            for i in 0..truth.nrows() {
                l1 += (estimate[[i, a]] - truth[[i, b]]).abs();
            }
            cost[[a, b]] = l1;
        }
    }
    let mut best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |p| {
        let total: f64 = p.iter().enumerate().map(|(a, &b)| cost[[a, b]]).sum();
        if total < best {
            best = total;
        }
    });
    best / k as f64
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Fraction of `truth` anchors present in the `estimate` anchor set.
pub fn anchor_overlap(estimate: &[usize], truth: &[usize]) -> f64 {
    let hits = truth.iter().filter(|t| estimate.contains(t)).count();
    hits as f64 / truth.len() as f64
}

/// Frobenius norm of a matrix difference relative to the second argument.
pub fn rel_frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    (num / den.max(1e-300)).sqrt()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
