//! Compressed sparse row matrices with the handful of kernels the
//! Liouvillian construction and the integrator need.

use num_complex::Complex64;

use super::dense::CMat;
use super::QuantumError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl Csr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` entries. Duplicates are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self, QuantumError> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= rows || *c >= cols) {
            return Err(QuantumError::IndexOutOfRange {
                index: r.max(c),
                bound: rows.max(cols),
            });
        }
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_idx = Vec::with_capacity(indices.len());
        let mut keep_val = Vec::with_capacity(values.len());
        for ((c, v), r) in indices.into_iter().zip(values).zip(row_of) {
            if v != ZERO {
                keep_idx.push(c);
                keep_val.push(v);
                indptr[r + 1] += 1;
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices: keep_idx,
            values: keep_val,
        })
    }

    pub fn from_dense(m: &CMat) -> Self {
        let mut indptr = Vec::with_capacity(m.rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != ZERO {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            m.set(i, j, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        if self.rows * self.cols == 0 {
            0.0
        } else {
            self.nnz() as f64 / (self.rows * self.cols) as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows)
            .flat_map(move |i| (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.values[k])))
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        match self.indices[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => ZERO,
        }
    }

    fn map_transposed(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let trip = self.iter().map(|(i, j, v)| (j, i, f(v))).collect();
        Self::from_triplets(self.cols, self.rows, trip).expect("indices in range")
    }

    pub fn transpose(&self) -> Self {
        self.map_transposed(|v| v)
    }

    pub fn adjoint(&self) -> Self {
        self.map_transposed(|v| v.conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == ZERO {
            return Self::zeros(self.rows, self.cols);
        }
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: Complex64) -> Result<Self, QuantumError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QuantumError::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let trip = self.iter().chain(other.iter().map(|(i, j, v)| (i, j, v * s))).collect();
        Self::from_triplets(self.rows, self.cols, trip)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, QuantumError> {
        if self.cols != other.rows {
            return Err(QuantumError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut trip = Vec::new();
        let mut acc = vec![ZERO; other.cols];
        let mut touched = Vec::new();
        let mut mark = vec![false; other.cols];
        for i in 0..self.rows {
            for (k, a) in self.row_entries(i) {
                for (j, b) in other.row_entries(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                trip.push((i, j, acc[j]));
                acc[j] = ZERO;
                mark[j] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.rows, other.cols, trip)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                trip.push((i * other.rows + k, j * other.cols + l, a * b));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, trip).expect("indices in range")
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[Complex64]) -> Complex64 {
        let mut s = ZERO;
        for k in self.indptr[i]..self.indptr[i + 1] {
            s += self.values[k] * x[self.indices[k]];
        }
        s
    }

    /// Row-parallel `y = A x`. Every row is an independent dot product, so
    /// the result is bitwise identical to [`Csr::matvec_into`].
    pub fn par_matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            const CHUNK: usize = 1024;
            if self.rows >= 4 * CHUNK {
                y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, ys)| {
                    for (r, yi) in ys.iter_mut().enumerate() {
                        *yi = self.row_dot(c * CHUNK + r, x);
                    }
                });
                return;
            }
        }
        self.matvec_into(x, y);
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>, QuantumError> {
        if x.len() != self.cols {
            return Err(QuantumError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut y = vec![ZERO; self.rows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// Sparse times dense.
    pub fn mul_dense(&self, m: &CMat) -> Result<CMat, QuantumError> {
        if self.cols != m.rows() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.cols,
                found: m.rows(),
            });
        }
        let mut out = CMat::zeros(self.rows, m.cols());
        let nc = m.cols();
        for i in 0..self.rows {
            for (k, a) in self.row_entries(i) {
                let src = m.row(k);
                let dst = &mut out.data_mut()[i * nc..(i + 1) * nc];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute row sum (induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row_entries(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = Csr::from_triplets(2, 2, vec![(0, 1, c(1.)), (0, 1, c(2.)), (1, 0, c(1.)), (1, 0, c(-1.))]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.));
        assert!(Csr::from_triplets(2, 2, vec![(2, 0, c(1.))]).is_err());
    }

    #[test]
    fn sparse_and_dense_kernels_agree() {
        let a = CMat::from_fn(3, 3, |i, j| {
            Complex64::new((i + 2 * j) as f64 % 3.0, i as f64 - j as f64)
        });
        let b = CMat::from_fn(3, 2, |i, j| Complex64::new(j as f64, i as f64));
        let sa = Csr::from_dense(&a);
        let sb = Csr::from_dense(&b);
        assert_eq!(sa.matmul(&sb).unwrap().to_dense(), a.matmul(&b).unwrap());
        assert_eq!(sa.kron(&sb).to_dense(), a.kron(&b));
        assert_eq!(sa.adjoint().to_dense(), a.adjoint());
        assert_eq!(sa.mul_dense(&b).unwrap(), a.matmul(&b).unwrap());
        let x = vec![c(1.), Complex64::new(0., 1.), c(-2.)];
        let mut y1 = vec![ZERO; 3];
        let mut y2 = vec![ZERO; 3];
        sa.matvec_into(&x, &mut y1);
        sa.par_matvec_into(&x, &mut y2);
        assert_eq!(y1, a.matvec(&x).unwrap());
        assert_eq!(y1, y2);
    }
}
