//! One-pass randomized eigendecomposition of a symmetric operator, with
//! optional power iterations for slowly decaying spectra.
//!
//! With `power_iters = 0` the operator is applied to a single Gaussian block
//! and the small compression is recovered from the sketch cross-matrix, so
//! the data is touched exactly once. With `power_iters = q > 0` the scheme
//! applies `2q + 1` block products and uses a Rayleigh-Ritz projection, which
//! sharpens the basis when the spectral gap at K is small.

use super::{dense, fix_column_signs, qr::thin_qr, EigenPair, LinalgError, SymOp};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Top-`k` approximate eigenpairs of `op` from a randomized sketch of
/// `k + oversampling` Gaussian probes. Deterministic given `seed`.
pub fn randomized_eig(
    op: &dyn SymOp,
    k: usize,
    oversampling: usize,
    power_iters: usize,
    seed: u64,
) -> Result<EigenPair, LinalgError> {
    let n = op.dim();
    let p = k + oversampling;
    if k == 0 || p > n {
        return Err(LinalgError::InvalidArg(format!(
            "randomized_eig: k + oversampling = {p} out of range for dimension {n}"
        )));
    }

    match attempt(op, k, p, power_iters, seed) {
        Ok(pair) => Ok(pair),
        Err(LinalgError::SketchIllConditioned) => {
            // one retry with an extra power iteration, then give up
            attempt(op, k, p, power_iters + 1, seed)
                .map_err(|_| LinalgError::SketchIllConditioned)
        }
        Err(e) => Err(e),
    }
}

fn attempt(
    op: &dyn SymOp,
    k: usize,
    p: usize,
    power_iters: usize,
    seed: u64,
) -> Result<EigenPair, LinalgError> {
    let n = op.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let omega = Array2::from_shape_fn((n, p), |_| normal.sample(&mut rng));

    let (q_basis, b_small) = if power_iters == 0 {
        let z = apply_block(op, &omega);
        let q = orth_truncated(&z);
        // one-pass recovery: B (Q^T Omega) = Q^T Z, solved through the
        // normal equations of the right inverse
        let w = q.t().dot(&omega); // r x p
        let qz = q.t().dot(&z); // r x p
        let g = w.dot(&w.t()); // r x r
        let rhs = qz.dot(&w.t()); // r x r
        let bt = dense::solve(g.view(), rhs.t().to_owned().view())
            .map_err(|_| LinalgError::SketchIllConditioned)?;
        let b = bt.t().to_owned();
        (q, symmetrize(b))
    } else {
        let mut q = orth_truncated(&omega);
        for _ in 0..(2 * power_iters) {
            let z = apply_block(op, &q);
            q = orth_truncated(&z);
        }
        let z = apply_block(op, &q); // final product, 2q + 1 in total
        let b = q.t().dot(&z);
        (q, symmetrize(b))
    };

    let (vals, vecs) = dense::jacobi_eig(b_small.view());
    let r = q_basis.ncols();
    let mut basis = Array2::<f64>::zeros((n, k));
    let mut eigenvalues = Array1::<f64>::zeros(k);
    let take = k.min(r);
    if take > 0 {
        let top = vecs.slice(ndarray::s![.., ..take]).to_owned();
        let u = q_basis.dot(&top);
        basis.slice_mut(ndarray::s![.., ..take]).assign(&u);
        for i in 0..take {
            eigenvalues[i] = vals[i];
        }
    }
    if take < k {
        // sketch rank fell below k; fill the remaining columns with fresh
        // orthonormal directions paired with zero eigenvalues
        pad_orthonormal(&mut basis, take, &mut rng);
    }
    fix_column_signs(&mut basis);
    Ok(EigenPair { basis, eigenvalues })
}

fn apply_block(op: &dyn SymOp, block: &Array2<f64>) -> Array2<f64> {
    let (n, p) = block.dim();
    let mut out = Array2::<f64>::zeros((n, p));
    for j in 0..p {
        out.column_mut(j).assign(&op.apply_vec(block.column(j)));
    }
    out
}

// QR with trailing-column truncation: columns whose R diagonal collapses are
// dropped so the basis stays well conditioned on rank-deficient sketches.
fn orth_truncated(z: &Array2<f64>) -> Array2<f64> {
    let f = thin_qr(z.view());
    let k = f.r.nrows();
    let max_diag = (0..k).fold(0.0f64, |m, j| m.max(f.r[[j, j]].abs()));
    if max_diag <= 0.0 {
        return f.q.slice(ndarray::s![.., ..1]).to_owned();
    }
    let mut keep = 0;
    for j in 0..k {
        if f.r[[j, j]].abs() > 1e-12 * max_diag {
            keep = j + 1;
        }
    }
    f.q.slice(ndarray::s![.., ..keep.max(1)]).to_owned()
}

fn symmetrize(b: Array2<f64>) -> Array2<f64> {
    let bt = b.t().to_owned();
    (&b + &bt) * 0.5
}

fn pad_orthonormal(basis: &mut Array2<f64>, from: usize, rng: &mut ChaCha20Rng) {
    let (n, k) = basis.dim();
    let normal = StandardNormal;
    for col in from..k {
        loop {
            let mut v = Array1::from_shape_fn(n, |_| normal.sample(rng));
            for j in 0..col {
                let c = basis.column(j).dot(&v);
                let bj = basis.column(j).to_owned();
                v.scaled_add(-c, &bj);
            }
            let nr = v.dot(&v).sqrt();
            if nr > 1e-8 {
                basis.column_mut(col).assign(&(v / nr));
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frob(a: &Array2<f64>) -> f64 {
        a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn reconstruction(pair: &EigenPair) -> Array2<f64> {
        let lam = Array2::from_diag(&pair.eigenvalues);
        pair.basis.dot(&lam).dot(&pair.basis.t())
    }

    #[test]
    fn exact_rank_k_recovered_in_one_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 40;
        let k = 4;
        let y = Array2::from_shape_fn((n, k), |_| rng.random_range(0.0..1.0f64));
        let c = y.dot(&y.t());
        let pair = randomized_eig(&c, k, 6, 0, 123).unwrap();
        let err = frob(&(&reconstruction(&pair) - &c)) / frob(&c);
        assert!(err <= 1e-8, "one-pass reconstruction error {err}");
        let gram = pair.basis.t().dot(&pair.basis);
        let eye = Array2::<f64>::eye(k);
        assert!(frob(&(&gram - &eye)) <= 1e-10);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 30;
        let m = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0f64));
        let c = (&m + &m.t()) * 0.5;
        let a = randomized_eig(&c, 5, 5, 1, 77).unwrap();
        let b = randomized_eig(&c, 5, 5, 1, 77).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.basis, b.basis);
    }

    #[test]
    fn different_seeds_differ() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 30;
        let m = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0f64));
        let c = (&m + &m.t()) * 0.5;
        let a = randomized_eig(&c, 5, 5, 0, 1).unwrap();
        let b = randomized_eig(&c, 5, 5, 0, 2).unwrap();
        assert_ne!(a.basis, b.basis);
    }

    #[test]
    fn rejects_oversized_sketch() {
        let c = Array2::<f64>::eye(5);
        assert!(randomized_eig(&c, 4, 4, 0, 0).is_err());
    }
}
