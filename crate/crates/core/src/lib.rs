//! First-order ADMM quadratic-program solver with pluggable step-size (ρ) adaptation.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: compressed-sparse-column storage, KKT assembly and a sparse LDLᵀ factorization.
//! - [`solver`]: the ADMM iteration, residuals, termination and the adaptive solve loop.
//! - [`policy`]: ρ-adaptation policies (fixed, residual-balancing heuristic, learned scalar and
//!   learned per-constraint vector) and their state featurization.
//! - [`nn`]: a small dense MLP with reverse-mode gradients, Adam and a binary weight format.
//! - [`rl`]: TD3 training of the learned policies against the solver as an environment.
//! - [`problems`]: feasible-by-construction random QP generators and dimension schedules.
//! - [`qps`]: QPS (MPS with quadratic objective) reader and writer.
//! - [`bench`]: benchmark grids, shifted geometric means and summary tables.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`). The aliases at the crate root
//! fix the scalar to `f64`, which is what the trainer, benchmark harness and CLI use.

pub mod bench;
pub mod linalg;
pub mod nn;
pub mod policy;
pub mod problems;
pub mod qps;
pub mod rl;
mod scalar;
pub mod solver;

pub use scalar::{norm_inf, Real};
pub use solver::Status;

pub type CscMatrix = linalg::CscMatrix<f64>;
pub type KktSystem = linalg::KktSystem<f64>;
pub type LdlFactor = linalg::LdlFactor<f64>;
pub type QpProblem = solver::QpProblem<f64>;
pub type SolverSettings = solver::SolverSettings<f64>;
pub type SolverState = solver::SolverState<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type Solver = solver::Solver<f64>;
pub type Mlp = nn::Mlp<f64>;
pub type AdamState = nn::AdamState<f64>;

pub type CscMatrixF32 = linalg::CscMatrix<f32>;
pub type QpProblemF32 = solver::QpProblem<f32>;
pub type SolverSettingsF32 = solver::SolverSettings<f32>;
pub type SolverF32 = solver::Solver<f32>;
