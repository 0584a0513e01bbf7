//! QPS reader and writer: MPS with a `QUADOBJ` (one triangle) or `QMATRIX` (full)
//! quadratic objective section.
//!
//! Free-format fields are accepted; RHS, RANGES and BOUNDS lines may omit the set name.
//! Conversion to [`QpProblem`] appends one identity row per variable that has a finite
//! bound, after the linear rows.

mod parse;
mod write;

pub use parse::parse_qps;
pub use write::write_qps;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::linalg::CscMatrix;
use crate::solver::QpProblem;
use crate::Real;

/// Magnitudes at or above this are read as infinite.
pub const QPS_INFINITY: f64 = 1e30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("variable {name}: lower bound {lower} exceeds upper bound {upper}")]
    InconsistentBounds { name: String, lower: f64, upper: f64 },
    #[error("row {name}: range yields lower {lower} above upper {upper}")]
    InconsistentRow { name: String, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    N,
    L,
    G,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowRecord {
    pub kind: RowKind,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Up,
    Lo,
    Fx,
    Fr,
    Mi,
    Pl,
}

/// Indices refer to [`QpsDocument::rows`] and [`QpsDocument::columns`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnEntry {
    pub col: usize,
    pub row: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowValue {
    pub row: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEntry {
    pub kind: BoundKind,
    pub col: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEntry {
    pub col1: usize,
    pub col2: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadSection {
    /// Each off-diagonal pair listed once.
    #[default]
    Quadobj,
    /// Both triangles listed.
    Qmatrix,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QpsDocument {
    pub name: String,
    pub rows: Vec<RowRecord>,
    pub objective_row: usize,
    pub columns: Vec<String>,
    pub entries: Vec<ColumnEntry>,
    pub rhs: Vec<RowValue>,
    pub ranges: Vec<RowValue>,
    pub bounds: Vec<BoundEntry>,
    pub quad_section: QuadSection,
    pub quad: Vec<QuadEntry>,
}

fn to_infinite(v: f64) -> f64 {
    if v >= QPS_INFINITY {
        f64::INFINITY
    } else if v <= -QPS_INFINITY {
        f64::NEG_INFINITY
    } else {
        v
    }
}

impl QpsDocument {
    pub fn num_variables(&self) -> usize {
        self.columns.len()
    }

    /// Constant term of the objective; an RHS entry on the objective row stores its negation.
    pub fn objective_constant(&self) -> f64 {
        -self.rhs.iter().filter(|r| r.row == self.objective_row).map(|r| r.value).sum::<f64>()
    }

    /// Variable bounds after applying the BOUNDS section to the default `[0, ∞)`.
    pub fn variable_bounds(&self) -> Result<Vec<(f64, f64)>, QpsError> {
        let mut bounds = vec![(0.0, f64::INFINITY); self.columns.len()];
        let mut lower_set = vec![false; self.columns.len()];
        for b in &self.bounds {
            let (lo, up) = &mut bounds[b.col];
            let v = b.value.map(to_infinite).unwrap_or(0.0);
            match b.kind {
                BoundKind::Up => {
                    *up = v;
                    // Negative upper bound with an untouched lower bound frees the lower side.
                    if v < 0.0 && !lower_set[b.col] {
                        *lo = f64::NEG_INFINITY;
                    }
                }
                BoundKind::Lo => {
                    *lo = v;
                    lower_set[b.col] = true;
                }
                BoundKind::Fx => {
                    *lo = v;
                    *up = v;
                    lower_set[b.col] = true;
                }
                BoundKind::Fr => {
                    *lo = f64::NEG_INFINITY;
                    *up = f64::INFINITY;
                    lower_set[b.col] = true;
                }
                BoundKind::Mi => {
                    *lo = f64::NEG_INFINITY;
                    lower_set[b.col] = true;
                }
                BoundKind::Pl => *up = f64::INFINITY,
            }
        }
        for (j, &(lower, upper)) in bounds.iter().enumerate() {
            if lower > upper {
                return Err(QpsError::InconsistentBounds { name: self.columns[j].clone(), lower, upper });
            }
        }
        Ok(bounds)
    }

    /// Converts to `l ≤ Ax ≤ u` form: linear rows in declaration order, then one identity
    /// row per variable with a finite bound.
    pub fn to_qp<T: Real>(&self) -> Result<QpProblem<T>, QpsError> {
        let n = self.columns.len();
        let mut row_map = vec![None; self.rows.len()];
        let mut linear = Vec::new();
        for (r, rec) in self.rows.iter().enumerate() {
            if rec.kind != RowKind::N {
                row_map[r] = Some(linear.len());
                linear.push(r);
            }
        }

        let mut rhs = vec![0.0; self.rows.len()];
        for e in &self.rhs {
            rhs[e.row] = e.value;
        }
        let mut range = vec![None; self.rows.len()];
        for e in &self.ranges {
            range[e.row] = Some(e.value);
        }

        let mut l = Vec::with_capacity(linear.len());
        let mut u = Vec::with_capacity(linear.len());
        for &r in &linear {
            let b = rhs[r];
            let (lo, hi) = match (self.rows[r].kind, range[r]) {
                (RowKind::L, None) => (f64::NEG_INFINITY, b),
                (RowKind::G, None) => (b, f64::INFINITY),
                (RowKind::E, None) => (b, b),
                (RowKind::L, Some(rv)) => (b - rv.abs(), b),
                (RowKind::G, Some(rv)) => (b, b + rv.abs()),
                (RowKind::E, Some(rv)) if rv >= 0.0 => (b, b + rv),
                (RowKind::E, Some(rv)) => (b + rv, b),
                (RowKind::N, _) => unreachable!("objective rows are skipped"),
            };
            let (lo, hi) = (to_infinite(lo), to_infinite(hi));
            if lo > hi {
                return Err(QpsError::InconsistentRow { name: self.rows[r].name.clone(), lower: lo, upper: hi });
            }
            l.push(lo);
            u.push(hi);
        }

        let mut q = vec![0.0; n];
        let mut triplets = Vec::new();
        for e in &self.entries {
            if e.row == self.objective_row {
                q[e.col] += e.value;
            } else if let Some(i) = row_map[e.row] {
                triplets.push((i, e.col, e.value));
            }
        }

        let bounds = self.variable_bounds()?;
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if lo.is_finite() || hi.is_finite() {
                triplets.push((l.len(), j, 1.0));
                l.push(lo);
                u.push(hi);
            }
        }
        let m = l.len();

        let mut p_upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in &self.quad {
            let (i, j) = (e.col1.min(e.col2), e.col1.max(e.col2));
            if self.quad_section == QuadSection::Qmatrix && e.col1 > e.col2 {
                continue;
            }
            *p_upper.entry((i, j)).or_default() += e.value;
        }
        let p_triplets: Vec<_> = p_upper.into_iter().map(|((i, j), v)| (i, j, T::lit(v))).collect();

        let cast = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        let a_triplets: Vec<_> = triplets.into_iter().map(|(i, j, v)| (i, j, T::lit(v))).collect();
        let p = CscMatrix::from_triplets(n, n, &p_triplets).expect("indices validated by the parser");
        let a = CscMatrix::from_triplets(m, n, &a_triplets).expect("indices validated by the parser");
        Ok(QpProblem::new(p, cast(q), a, cast(l), cast(u), self.name.clone())
            .expect("bounds checked above and the parser only accepts finite numbers"))
    }
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::N => "N",
            RowKind::L => "L",
            RowKind::G => "G",
            RowKind::E => "E",
        })
    }
}
