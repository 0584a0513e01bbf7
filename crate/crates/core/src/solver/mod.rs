//! ADMM iteration for `min ½xᵀPx + qᵀx  s.t.  l ≤ Ax ≤ u`, with periodic ρ adaptation.

mod admm;
mod problem;
mod solve;

pub use admm::{
    admm_iterate, check_termination, compute_residuals, heuristic_rho_update, residual_terms, rho_from_scalar,
    AdmmWork, ResidualTerms, RESIDUAL_FLOOR,
};
pub use problem::QpProblem;
pub use solve::{solve, SolveResult, Solver};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("warm start has wrong dimensions: {0}")]
    WarmStart(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Running,
    Solved,
    IterationLimit,
    TimeLimit,
    NonConvergent,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "Running",
            Status::Solved => "Solved",
            Status::IterationLimit => "IterationLimit",
            Status::TimeLimit => "TimeLimit",
            Status::NonConvergent => "NonConvergent",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Running" => Ok(Status::Running),
            "Solved" => Ok(Status::Solved),
            "IterationLimit" => Ok(Status::IterationLimit),
            "TimeLimit" => Ok(Status::TimeLimit),
            "NonConvergent" => Ok(Status::NonConvergent),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings<T> {
    /// Primal regularization added to `P` in the KKT matrix.
    pub sigma: T,
    pub eps_abs: T,
    pub eps_rel: T,
    pub max_iter: usize,
    /// Iterations between policy invocations; a multiple of `check_termination`.
    pub adapt_interval: usize,
    pub rho_bounds: (T, T),
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub check_termination: usize,
    pub rho_bar_init: T,
    /// Multiplier applied to ρ̄ on equality rows.
    pub equality_rho_scale: T,
    /// A proposed ρ is only applied (and the KKT matrix refactored) when some entry moves
    /// by more than this factor. `None` applies every proposal.
    pub rho_refactor_tol: Option<T>,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            sigma: T::lit(1e-6),
            eps_abs: T::lit(1e-3),
            eps_rel: T::lit(1e-3),
            max_iter: 200_000,
            adapt_interval: 100,
            rho_bounds: (T::lit(1e-6), T::lit(1e6)),
            time_limit: None,
            check_termination: 25,
            rho_bar_init: T::lit(0.1),
            equality_rho_scale: T::lit(1e3),
            rho_refactor_tol: Some(T::lit(5.0)),
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::InvalidSettings(msg.to_string()));
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.sigma) {
            return bad("sigma must be positive");
        }
        if !positive(self.eps_abs) || !(self.eps_rel >= T::zero()) {
            return bad("eps_abs must be positive and eps_rel nonnegative");
        }
        if self.max_iter == 0 || self.check_termination == 0 || self.adapt_interval == 0 {
            return bad("max_iter, check_termination and adapt_interval must be positive");
        }
        if self.adapt_interval % self.check_termination != 0 {
            return bad("adapt_interval must be a multiple of check_termination");
        }
        let (lo, hi) = self.rho_bounds;
        if !positive(lo) || !positive(hi) || lo >= hi {
            return bad("rho_bounds must satisfy 0 < lo < hi");
        }
        if !positive(self.rho_bar_init) || !positive(self.equality_rho_scale) {
            return bad("rho_bar_init and equality_rho_scale must be positive");
        }
        if let Some(tol) = self.rho_refactor_tol {
            if !(tol >= T::one()) {
                return bad("rho_refactor_tol must be at least 1");
            }
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                return bad("time_limit must be positive");
            }
        }
        Ok(())
    }

    pub fn clamp_rho(&self, rho: T) -> T {
        rho.max(self.rho_bounds.0).min(self.rho_bounds.1)
    }
}

/// ADMM iterates and the quantities the policies observe.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    /// `A x` for the current `x`.
    pub ax: Vec<T>,
    pub rho: Vec<T>,
    pub rho_bar: T,
    pub iter: usize,
    pub xi_primal: T,
    pub xi_dual: T,
    pub status: Status,
}

impl<T: Real> SolverState<T> {
    /// All-zero iterates with the given ρ.
    pub fn cold(n: usize, rho: Vec<T>, rho_bar: T) -> Self {
        let m = rho.len();
        Self {
            x: vec![T::zero(); n],
            y: vec![T::zero(); m],
            z: vec![T::zero(); m],
            ax: vec![T::zero(); m],
            rho,
            rho_bar,
            iter: 0,
            xi_primal: T::infinity(),
            xi_dual: T::infinity(),
            status: Status::Running,
        }
    }
}
