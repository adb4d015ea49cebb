//! Compressed sparse row matrices.

/// Sparse matrix in CSR form. Column indices are sorted and unique within
/// each row.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from (row, col, value) triplets, summing
    /// duplicates. Entries that sum to exactly zero are kept; explicit
    /// zero triplets are dropped up front.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, v) in triplets {
            debug_assert!(r < nrows);
            if v != 0.0 {
                counts[r + 1] += 1;
            }
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; counts[nrows]];
        let mut vals = vec![0.0; counts[nrows]];
        let mut next = counts.clone();
        for &(r, c, v) in triplets {
            debug_assert!(c < ncols);
            if v != 0.0 {
                let k = next[r];
                cols[k] = c;
                vals[k] = v;
                next[r] += 1;
            }
        }
        // sort each row by column and merge duplicates
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            scratch.clear();
            for k in counts[r]..counts[r + 1] {
                scratch.push((cols[k], vals[k]));
            }
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < scratch.len() {
                let c = scratch[i].0;
                let mut v = scratch[i].1;
                i += 1;
                while i < scratch.len() && scratch[i].0 == c {
                    v += scratch[i].1;
                    i += 1;
                }
                out_cols.push(c);
                out_vals.push(v);
            }
            row_ptr[r + 1] = out_cols.len();
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx: out_cols,
            values: out_vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (columns, values) of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// y += A x
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] += acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let kk = next[c];
                cols[kk] = r;
                vals[kk] = self.values[k];
                next[c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx: cols,
            values: vals,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.nrows.min(self.ncols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    /// (A + A^T) / 2; requires a square matrix.
    pub fn symmetrized(&self) -> CsrMatrix {
        assert_eq!(self.nrows, self.ncols);
        let mut triplets = Vec::with_capacity(2 * self.nnz());
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let v = 0.5 * self.values[k];
                triplets.push((r, c, v));
                triplets.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, &triplets)
    }

    /// Leading principal sub-matrix on indices `0..k`.
    pub fn principal_submatrix(&self, k: usize) -> CsrMatrix {
        assert!(k <= self.nrows && k <= self.ncols);
        let mut triplets = Vec::new();
        for r in 0..k {
            for kk in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[kk];
                if c < k {
                    triplets.push((r, c, self.values[kk]));
                }
            }
        }
        CsrMatrix::from_triplets(k, k, &triplets)
    }

    /// Sparse matrix product self * other.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut accum = vec![0.0f64; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut active: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            active.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let mid = self.col_idx[k];
                for kk in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[kk];
                    if marker[c] != r {
                        marker[c] = r;
                        accum[c] = 0.0;
                        active.push(c);
                    }
                    accum[c] += a * other.values[kk];
                }
            }
            active.sort_unstable();
            for &c in &active {
                cols.push(c);
                vals.push(accum[c]);
            }
            row_ptr[r + 1] = cols.len();
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx: cols,
            values: vals,
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |A - A^T| entrywise; 0 for symmetric matrices.
    pub fn asymmetry(&self) -> f64 {
        let at = self.transpose();
        let mut m = 0.0f64;
        for r in 0..self.nrows {
            let (c1, v1) = self.row(r);
            for (k, &c) in c1.iter().enumerate() {
                m = m.max((v1[k] - at.get(r, c)).abs());
            }
            let (c2, v2) = at.row(r);
            for (k, &c) in c2.iter().enumerate() {
                m = m.max((v2[k] - self.get(r, c)).abs());
            }
        }
        m
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }

    /// Rows with no stored entries.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.nrows)
            .filter(|&r| self.row_ptr[r] == self.row_ptr[r + 1])
            .collect()
    }
}

/// x^T A y
pub fn quadratic_form(a: &CsrMatrix, x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for r in 0..a.nrows() {
        let (cols, vals) = a.row(r);
        let mut acc = 0.0;
        for (k, &c) in cols.iter().enumerate() {
            acc += vals[k] * y[c];
        }
        total += x[r] * acc;
    }
    total
}
