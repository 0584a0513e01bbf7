use crate::linalg::CscMatrix;
use crate::Real;

use super::SolverError;

/// `min ½xᵀPx + qᵀx  s.t.  l ≤ Ax ≤ u`; `P` is stored as its upper triangle.
///
/// Equality rows have `l[i] == u[i]`; one-sided rows use `±∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem<T> {
    pub p: CscMatrix<T>,
    pub q: Vec<T>,
    pub a: CscMatrix<T>,
    pub l: Vec<T>,
    pub u: Vec<T>,
    pub name: String,
}

impl<T: Real> QpProblem<T> {
    pub fn new(
        p: CscMatrix<T>,
        q: Vec<T>,
        a: CscMatrix<T>,
        l: Vec<T>,
        u: Vec<T>,
        name: impl Into<String>,
    ) -> Result<Self, SolverError> {
        let problem = Self { p, q, a, l, u, name: name.into() };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidProblem(msg));
        let n = self.q.len();
        let m = self.l.len();
        if self.p.shape() != (n, n) {
            return bad(format!("P is {:?}, expected {n}x{n}", self.p.shape()));
        }
        if !self.p.is_upper_triangular() {
            return bad("P must be stored as its upper triangle".into());
        }
        if self.a.shape() != (m, n) {
            return bad(format!("A is {:?}, expected {m}x{n}", self.a.shape()));
        }
        if self.u.len() != m {
            return bad(format!("u has length {}, l has {m}", self.u.len()));
        }
        if self.q.iter().chain(self.p.values()).chain(self.a.values()).any(|v| !v.is_finite()) {
            return bad("P, q and A must be finite".into());
        }
        for (i, (&lo, &hi)) in self.l.iter().zip(&self.u).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return bad(format!("row {i}: bounds [{lo}, {hi}] are inconsistent"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> usize {
        self.l.len()
    }

    /// Nonzeros of the full (both triangles) `P` plus nonzeros of `A`.
    pub fn nnz(&self) -> usize {
        let diag = (0..self.n()).filter(|&j| self.p.col(j).any(|(i, _)| i == j)).count();
        2 * self.p.nnz() - diag + self.a.nnz()
    }

    pub fn objective(&self, x: &[T]) -> T {
        let px = self.p.sym_upper_mul_vec(x);
        let quad: T = x.iter().zip(&px).map(|(&a, &b)| a * b).sum();
        let lin: T = x.iter().zip(&self.q).map(|(&a, &b)| a * b).sum();
        T::lit(0.5) * quad + lin
    }

    /// Rows with `l[i] == u[i]`.
    pub fn is_equality_row(&self, i: usize) -> bool {
        self.l[i] == self.u[i]
    }

    /// Reorders the constraint rows so that row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Self {
            p: self.p.clone(),
            q: self.q.clone(),
            a: self.a.permute_rows(perm),
            l: perm.iter().map(|&i| self.l[i]).collect(),
            u: perm.iter().map(|&i| self.u[i]).collect(),
            name: self.name.clone(),
        }
    }

    pub fn cast<U: Real>(&self) -> QpProblem<U> {
        let conv = |v: &[T]| v.iter().map(|&x| U::lit(x.to_f64_lossy())).collect();
        QpProblem {
            p: self.p.cast(),
            q: conv(&self.q),
            a: self.a.cast(),
            l: conv(&self.l),
            u: conv(&self.u),
            name: self.name.clone(),
        }
    }
}
