use crate::Real;

use super::{minimum_degree, CscMatrix, KktSystem, LinalgError};

/// Systems smaller than this keep the natural ordering.
pub const NATURAL_ORDERING_BELOW: usize = 64;

/// Sparse `P K Pᵀ = L D Lᵀ` factorization of a quasi-definite matrix.
///
/// `L` is unit lower triangular; only its strictly-lower part is stored. The symbolic
/// analysis (ordering, elimination tree, column counts) is kept so that a matrix with the
/// same pattern can be refactorized cheaply after a ρ update.
#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    etree: Vec<Option<usize>>,
    lnz: Vec<usize>,
    /// Column pointers of `L`, fixed by the symbolic analysis.
    l_col_ptr: Vec<usize>,
    /// Permuted upper triangle and, for every value of the input, its slot in `permuted`.
    permuted: CscMatrix<T>,
    permuted_slot: Vec<usize>,
    l: CscMatrix<T>,
    d: Vec<T>,
    d_inv: Vec<T>,
    /// Input matrix (upper triangle), used for iterative refinement.
    original: CscMatrix<T>,
}

/// Factors the KKT matrix of `kkt`.
pub fn ldl_factor<T: Real>(kkt: &KktSystem<T>) -> Result<LdlFactor<T>, LinalgError> {
    LdlFactor::new(kkt.matrix())
}

/// Solves `K x = b` with one pass of iterative refinement.
pub fn ldl_solve<T: Real>(factor: &LdlFactor<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    factor.solve(b)
}

impl<T: Real> LdlFactor<T> {
    /// Orders, analyses and factors a symmetric matrix stored as its upper triangle.
    pub fn new(upper: &CscMatrix<T>) -> Result<Self, LinalgError> {
        let n = upper.ncols();
        if upper.nrows() != n {
            return Err(LinalgError::DimensionMismatch(format!("matrix is {}x{}", upper.nrows(), n)));
        }
        if !upper.is_upper_triangular() {
            return Err(LinalgError::NotUpperTriangular);
        }
        let perm = if n < NATURAL_ORDERING_BELOW { (0..n).collect() } else { minimum_degree(upper) };
        Self::with_ordering(upper, perm)
    }

    /// Factors with a caller-supplied ordering (`perm[k]` = original index at position `k`).
    pub fn with_ordering(upper: &CscMatrix<T>, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = upper.ncols();
        if perm.len() != n {
            return Err(LinalgError::DimensionMismatch(format!("ordering has length {}", perm.len())));
        }
        let mut perm_inv = vec![usize::MAX; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || perm_inv[p] != usize::MAX {
                return Err(LinalgError::InvalidStructure("ordering is not a permutation".into()));
            }
            perm_inv[p] = k;
        }

        let (permuted, permuted_slot) = permute_symmetric(upper, &perm_inv);
        let (etree, lnz) = elimination_tree(&permuted);

        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for &c in &lnz {
            col_ptr.push(col_ptr.last().copied().unwrap_or(0) + c);
        }
        let mut factor = Self {
            perm,
            perm_inv,
            etree,
            lnz,
            l_col_ptr: col_ptr,
            permuted,
            permuted_slot,
            l: CscMatrix::zeros(n, n),
            d: vec![T::zero(); n],
            d_inv: vec![T::zero(); n],
            original: upper.clone(),
        };
        factor.numeric()?;
        Ok(factor)
    }

    /// Numeric refactorization of a matrix with the same sparsity pattern.
    pub fn refactor(&mut self, upper: &CscMatrix<T>) -> Result<(), LinalgError> {
        if upper.col_ptr() != self.original.col_ptr() || upper.row_idx() != self.original.row_idx() {
            return Err(LinalgError::PatternMismatch);
        }
        {
            let dst = self.permuted.values_mut();
            for (&slot, &v) in self.permuted_slot.iter().zip(upper.values()) {
                dst[slot] = v;
            }
        }
        self.original.values_mut().copy_from_slice(upper.values());
        self.numeric()
    }

    /// Up-looking LDLᵀ: row `k` of `L` is found by a sparse triangular solve whose
    /// pattern is read off the elimination tree.
    fn numeric(&mut self) -> Result<(), LinalgError> {
        let n = self.d.len();
        let a = &self.permuted;
        let lp = self.l_col_ptr.clone();
        let mut li = vec![0usize; lp[n]];
        let mut lx = vec![T::zero(); lp[n]];
        let mut filled = vec![0usize; n];
        let mut y = vec![T::zero(); n];
        let mut flag = vec![usize::MAX; n];
        let mut pattern = vec![0usize; n];
        let mut stack = vec![0usize; n];

        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for (i, v) in a.col(k) {
                y[i] += v;
                let mut len = 0;
                let mut node = i;
                while flag[node] != k {
                    stack[len] = node;
                    len += 1;
                    flag[node] = k;
                    match self.etree[node] {
                        Some(parent) => node = parent,
                        None => break,
                    }
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = stack[len];
                }
            }

            let mut dk = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let start = lp[i];
                for p in start..start + filled[i] {
                    y[li[p]] -= lx[p] * yi;
                }
                let lki = yi * self.d_inv[i];
                dk -= lki * yi;
                let slot = start + filled[i];
                li[slot] = k;
                lx[slot] = lki;
                filled[i] += 1;
            }
            if dk == T::zero() || !dk.is_finite() {
                return Err(LinalgError::ZeroPivot(k));
            }
            self.d[k] = dk;
            self.d_inv[k] = dk.recip();
        }

        debug_assert!(filled.iter().zip(&self.lnz).all(|(f, c)| f == c));
        self.l = CscMatrix::new(n, n, lp, li, lx).map_err(|e| LinalgError::InvalidStructure(e.to_string()))?;
        Ok(())
    }

    /// Solves `K x = b` using the factors only (no refinement).
    pub fn solve_unrefined(&self, b: &[T]) -> Vec<T> {
        let n = self.d.len();
        let mut w: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        let (lp, li, lx) = (self.l.col_ptr(), self.l.row_idx(), self.l.values());
        for j in 0..n {
            let wj = w[j];
            if wj != T::zero() {
                for p in lp[j]..lp[j + 1] {
                    w[li[p]] -= lx[p] * wj;
                }
            }
        }
        for (wj, &di) in w.iter_mut().zip(&self.d_inv) {
            *wj *= di;
        }
        for j in (0..n).rev() {
            let mut acc = w[j];
            for p in lp[j]..lp[j + 1] {
                acc -= lx[p] * w[li[p]];
            }
            w[j] = acc;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }

    /// Solves `K x = b`, followed by one step of iterative refinement.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        let n = self.d.len();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch(format!("rhs has length {}, expected {}", b.len(), n)));
        }
        let mut x = self.solve_unrefined(b);
        let kx = self.original.sym_upper_mul_vec(&x);
        let r: Vec<T> = b.iter().zip(&kx).map(|(&bi, &ki)| bi - ki).collect();
        let dx = self.solve_unrefined(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        Ok(x)
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Strictly-lower part of the unit lower-triangular factor.
    pub fn l(&self) -> &CscMatrix<T> {
        &self.l
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn perm_inv(&self) -> &[usize] {
        &self.perm_inv
    }

    /// Number of negative entries of `D` (equals the constraint count for a KKT matrix).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&d| d < T::zero()).count()
    }
}

/// Symmetric permutation of an upper-triangular matrix, returning the permuted upper
/// triangle and the destination slot of every input value.
fn permute_symmetric<T: Real>(upper: &CscMatrix<T>, perm_inv: &[usize]) -> (CscMatrix<T>, Vec<usize>) {
    let n = upper.ncols();
    let mut entries: Vec<(usize, usize, usize)> = Vec::with_capacity(upper.nnz());
    for j in 0..n {
        for p in upper.col_ptr()[j]..upper.col_ptr()[j + 1] {
            let i = upper.row_idx()[p];
            let (pi, pj) = (perm_inv[i], perm_inv[j]);
            let (r, c) = if pi <= pj { (pi, pj) } else { (pj, pi) };
            entries.push((c, r, p));
        }
    }
    entries.sort_unstable();

    let mut col_ptr = vec![0usize; n + 1];
    let mut row_idx = Vec::with_capacity(entries.len());
    let mut values = Vec::with_capacity(entries.len());
    let mut slot = vec![0usize; entries.len()];
    for (dst, &(c, r, src)) in entries.iter().enumerate() {
        col_ptr[c + 1] += 1;
        row_idx.push(r);
        values.push(upper.values()[src]);
        slot[src] = dst;
    }
    for j in 0..n {
        col_ptr[j + 1] += col_ptr[j];
    }
    let permuted = CscMatrix::new(n, n, col_ptr, row_idx, values).expect("permutation preserves structure");
    (permuted, slot)
}

/// Elimination tree and strictly-lower column counts of `L` for an upper-triangular pattern.
fn elimination_tree<T: Real>(upper: &CscMatrix<T>) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = upper.ncols();
    let mut parent = vec![None; n];
    let mut lnz = vec![0usize; n];
    let mut flag = vec![usize::MAX; n];
    for k in 0..n {
        flag[k] = k;
        for (i, _) in upper.col(k) {
            let mut node = i;
            while flag[node] != k {
                if parent[node].is_none() {
                    parent[node] = Some(k);
                }
                lnz[node] += 1;
                flag[node] = k;
                node = parent[node].expect("set just above");
            }
        }
    }
    (parent, lnz)
}
