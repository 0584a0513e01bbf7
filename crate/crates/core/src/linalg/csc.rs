use crate::Real;

use super::LinalgError;

/// Compressed sparse column matrix.
///
/// Row indices inside each column are strictly increasing and there are no duplicate
/// entries. Explicit zeros are allowed (they are kept as structural nonzeros).
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CscMatrix<T> {
    /// Builds a matrix from raw CSC arrays, checking every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self, LinalgError> {
        if col_ptr.len() != ncols + 1 {
            return Err(LinalgError::InvalidStructure(format!(
                "col_ptr has length {}, expected {}",
                col_ptr.len(),
                ncols + 1
            )));
        }
        if col_ptr[0] != 0 {
            return Err(LinalgError::InvalidStructure("col_ptr[0] must be 0".into()));
        }
        if col_ptr[ncols] != row_idx.len() || row_idx.len() != values.len() {
            return Err(LinalgError::InvalidStructure(format!(
                "col_ptr[ncols]={}, row_idx has {} entries, values has {}",
                col_ptr[ncols],
                row_idx.len(),
                values.len()
            )));
        }
        for j in 0..ncols {
            if col_ptr[j] > col_ptr[j + 1] {
                return Err(LinalgError::InvalidStructure(format!("col_ptr decreases at column {j}")));
            }
            let rows = &row_idx[col_ptr[j]..col_ptr[j + 1]];
            for (k, &r) in rows.iter().enumerate() {
                if r >= nrows {
                    return Err(LinalgError::InvalidStructure(format!(
                        "row index {r} out of range in column {j}"
                    )));
                }
                if k > 0 && rows[k - 1] >= r {
                    return Err(LinalgError::InvalidStructure(format!(
                        "row indices not strictly increasing in column {j}"
                    )));
                }
            }
        }
        Ok(Self { nrows, ncols, col_ptr, row_idx, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, col_ptr: vec![0; ncols + 1], row_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Result<Self, LinalgError> {
        let mut sorted: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "triplet ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
            sorted.push((c, r, v));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (c, r, v) in sorted {
            if last == Some((c, r)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((c, r));
            col_ptr[c + 1] += 1;
            row_idx.push(r);
            values.push(v);
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self { nrows, ncols, col_ptr, row_idx, values })
    }

    /// Builds a matrix from dense rows, storing only the nonzero entries.
    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..ncols {
            for (i, row) in rows.iter().enumerate() {
                let v = row[j];
                if v != T::zero() {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self { nrows, ncols, col_ptr, row_idx, values }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                out[self.row_idx[p]][j] = self.values[p];
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Iterates the stored `(row, value)` pairs of column `j`.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Stored value at `(i, j)`, zero when the entry is structurally absent.
    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        match self.row_idx[range.clone()].binary_search(&i) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.iter_mut().for_each(|v| *v = T::zero());
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == T::zero() {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = Aᵀ x`.
    pub fn tr_mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for j in 0..self.ncols {
            let mut acc = T::zero();
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.values[p] * x[self.row_idx[p]];
            }
            y[j] = acc;
        }
    }

    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.ncols];
        self.tr_mul_vec_into(x, &mut y);
        y
    }

    /// `y = S x` where `self` holds the upper triangle of the symmetric matrix `S`.
    pub fn sym_upper_mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(self.nrows, self.ncols);
        y.iter_mut().for_each(|v| *v = T::zero());
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = self.values[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
    }

    pub fn sym_upper_mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.sym_upper_mul_vec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let r = self.row_idx[p];
                let dst = next[r];
                next[r] += 1;
                row_idx[dst] = j;
                values[dst] = self.values[p];
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, col_ptr, row_idx, values }
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.ncols).all(|j| self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]].iter().all(|&i| i <= j))
    }

    /// Keeps only the entries on or above the diagonal.
    pub fn upper_triangle(&self) -> Self {
        let mut col_ptr = Vec::with_capacity(self.ncols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..self.ncols {
            for (i, v) in self.col(j) {
                if i <= j {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self { nrows: self.nrows, ncols: self.ncols, col_ptr, row_idx, values }
    }

    /// Reorders rows so that row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nrows, "permutation length must match row count");
        let mut inv = vec![0usize; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let triplets: Vec<(usize, usize, T)> = (0..self.ncols)
            .flat_map(|j| self.col(j).map(move |(i, v)| (i, j, v)))
            .map(|(i, j, v)| (inv[i], j, v))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &triplets).expect("permuted indices stay in range")
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> T {
        crate::norm_inf(&self.values)
    }

    pub fn cast<U: Real>(&self) -> CscMatrix<U> {
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: self.values.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_rows() {
        let err = CscMatrix::<f64>::new(3, 1, vec![0, 2], vec![2, 1], vec![1.0, 2.0]);
        assert!(matches!(err, Err(LinalgError::InvalidStructure(_))));
    }

    #[test]
    fn rejects_bad_col_ptr_tail() {
        let err = CscMatrix::<f64>::new(2, 1, vec![0, 3], vec![0, 1], vec![1.0, 2.0]);
        assert!(err.is_err());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn products_match_dense() {
        let dense = vec![vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 0.5]];
        let m = CscMatrix::from_dense(&dense);
        assert_eq!(m.to_dense(), dense);
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, -4.5]);
        assert_eq!(m.tr_mul_vec(&[1.0, 2.0]), vec![1.0, -6.0, 3.0]);
        assert_eq!(m.transpose().to_dense(), vec![vec![1.0, 0.0], vec![0.0, -3.0], vec![2.0, 0.5]]);
    }

    #[test]
    fn symmetric_upper_product() {
        let upper = CscMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 3.0]]);
        assert_eq!(upper.sym_upper_mul_vec(&[1.0, 1.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn permute_rows_moves_rows() {
        let m = CscMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 0.0], vec![0.0, 5.0]]);
        let p = m.permute_rows(&[2, 0, 1]);
        assert_eq!(p.to_dense(), vec![vec![0.0, 5.0], vec![1.0, 2.0], vec![3.0, 0.0]]);
    }
}
