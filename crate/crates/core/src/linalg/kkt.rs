use crate::Real;

use super::{CscMatrix, LinalgError};

/// The quasi-definite ADMM system `[[P + σI, Aᵀ], [A, -diag(ρ)⁻¹]]`, upper triangle in CSC.
#[derive(Debug, Clone)]
pub struct KktSystem<T> {
    kkt: CscMatrix<T>,
    sigma: T,
    n: usize,
    m: usize,
    /// Index into `kkt.values()` of the `-1/ρᵢ` diagonal entry of each constraint row.
    rho_inv_diag_positions: Vec<usize>,
}

/// Assembles the KKT matrix from `P` (upper triangle), `A`, `σ` and `ρ`.
pub fn assemble_kkt<T: Real>(
    p: &CscMatrix<T>,
    a: &CscMatrix<T>,
    sigma: T,
    rho: &[T],
) -> Result<KktSystem<T>, LinalgError> {
    let n = p.ncols();
    let m = a.nrows();
    if p.nrows() != n {
        return Err(LinalgError::DimensionMismatch(format!("P is {}x{}", p.nrows(), n)));
    }
    if a.ncols() != n {
        return Err(LinalgError::DimensionMismatch(format!("A has {} columns, P has {}", a.ncols(), n)));
    }
    if rho.len() != m {
        return Err(LinalgError::DimensionMismatch(format!("rho has length {}, A has {} rows", rho.len(), m)));
    }
    if !(sigma > T::zero()) {
        return Err(LinalgError::NonPositive { what: "sigma", value: sigma.to_f64_lossy() });
    }
    check_rho(rho)?;
    if !p.is_upper_triangular() {
        return Err(LinalgError::NotUpperTriangular);
    }

    let at = a.transpose();
    let dim = n + m;
    let cap = p.nnz() + n + a.nnz() + m;
    let mut col_ptr = Vec::with_capacity(dim + 1);
    let mut row_idx = Vec::with_capacity(cap);
    let mut values = Vec::with_capacity(cap);
    col_ptr.push(0);

    for j in 0..n {
        let mut diag = sigma;
        for (i, v) in p.col(j) {
            if i == j {
                diag += v;
            } else {
                row_idx.push(i);
                values.push(v);
            }
        }
        row_idx.push(j);
        values.push(diag);
        col_ptr.push(row_idx.len());
    }

    let mut positions = Vec::with_capacity(m);
    for (i, &r) in rho.iter().enumerate() {
        for (j, v) in at.col(i) {
            row_idx.push(j);
            values.push(v);
        }
        positions.push(row_idx.len());
        row_idx.push(n + i);
        values.push(-r.recip());
        col_ptr.push(row_idx.len());
    }

    let kkt = CscMatrix::new(dim, dim, col_ptr, row_idx, values)?;
    Ok(KktSystem { kkt, sigma, n, m, rho_inv_diag_positions: positions })
}

fn check_rho<T: Real>(rho: &[T]) -> Result<(), LinalgError> {
    match rho.iter().find(|&&r| !(r > T::zero()) || !r.is_finite()) {
        Some(&bad) => Err(LinalgError::NonPositive { what: "rho", value: bad.to_f64_lossy() }),
        None => Ok(()),
    }
}

impl<T: Real> KktSystem<T> {
    /// Rewrites only the `-1/ρᵢ` diagonal slots; every other stored value is untouched.
    pub fn update_rho_entries(&mut self, rho: &[T]) -> Result<(), LinalgError> {
        if rho.len() != self.m {
            return Err(LinalgError::DimensionMismatch(format!(
                "rho has length {}, expected {}",
                rho.len(),
                self.m
            )));
        }
        check_rho(rho)?;
        let values = self.kkt.values_mut();
        for (&pos, &r) in self.rho_inv_diag_positions.iter().zip(rho) {
            values[pos] = -r.recip();
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CscMatrix<T> {
        &self.kkt
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rho_inv_diag_positions(&self) -> &[usize] {
        &self.rho_inv_diag_positions
    }
}
