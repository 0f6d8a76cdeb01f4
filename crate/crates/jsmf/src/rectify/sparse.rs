//! Symmetric sparse correction matrix stored as strictly-upper coordinate
//! triples; the lower half is mirrored on read. nnz accounting follows the
//! full symmetric matrix since that is the complexity currency of the
//! compressed operator.

use ndarray::{Array2, ArrayView1, ArrayViewMut1};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    /// (i, j, value) with i < j, sorted lexicographically.
    entries: Vec<(u32, u32, f64)>,
}

impl SparseSym {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    /// Builds from strictly-upper triples; sorts and requires i < j < n.
    pub fn from_triples(n: usize, mut triples: Vec<(u32, u32, f64)>) -> Self {
        for &(i, j, _) in &triples {
            assert!(i < j && (j as usize) < n, "triple ({i}, {j}) out of range");
        }
        triples.sort_unstable_by_key(|&(i, j, _)| (i, j));
        triples.dedup_by(|a, b| {
            if a.0 == b.0 && a.1 == b.1 {
                b.2 += a.2;
                true
            } else {
                false
            }
        });
        Self { n, entries: triples }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored (strictly upper) entry count.
    pub fn stored_nnz(&self) -> usize {
        self.entries.len()
    }

    /// Nonzeros of the full symmetric matrix.
    pub fn nnz(&self) -> usize {
        2 * self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// Sum of all entries of the full symmetric matrix.
    pub fn total_sum(&self) -> f64 {
        2.0 * self.entries.iter().map(|&(_, _, v)| v).sum::<f64>()
    }

    /// Squared Frobenius norm of the full symmetric matrix.
    pub fn frobenius_sq(&self) -> f64 {
        2.0 * self.entries.iter().map(|&(_, _, v)| v * v).sum::<f64>()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let key = (i.min(j) as u32, i.max(j) as u32);
        match self
            .entries
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
        {
            Ok(pos) => self.entries[pos].2,
            Err(_) => 0.0,
        }
    }

    /// Accumulates `E x` into `out`.
    pub fn apply_add(&self, x: ArrayView1<f64>, out: &mut ndarray::Array1<f64>) {
        for &(i, j, v) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            out[i] += v * x[j];
            out[j] += v * x[i];
        }
    }

    /// Adds row `i` of the symmetric matrix into `row`.
    pub fn add_row_to(&self, i: usize, row: &mut ArrayViewMut1<f64>) {
        for &(a, b, v) in &self.entries {
            let (a, b) = (a as usize, b as usize);
            if a == i {
                row[b] += v;
            } else if b == i {
                row[a] += v;
            }
        }
    }

    /// Adds the full symmetric matrix into `dense`.
    pub fn add_to_dense(&self, dense: &mut Array2<f64>) {
        for &(i, j, v) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            dense[[i, j]] += v;
            dense[[j, i]] += v;
        }
    }
}
