//! Feasible-by-construction QP generators and the benchmark dimension schedules.
//!
//! Every generated problem carries the point `x₀` its bounds were derived from, so
//! `l ≤ A x₀ ≤ u` holds by construction.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::CscMatrix;
use crate::solver::QpProblem;

/// Training problems draw seeds below this; validation seeds start here.
pub const VALIDATION_SEED_BASE: u64 = 1 << 39;
/// Held-out evaluation seeds start here.
pub const TEST_SEED_BASE: u64 = 1 << 40;

pub const DEFAULT_DENSITY: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("problem class {0} is registered but its generator is not implemented")]
    NotImplemented(ProblemClass),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("unknown problem class {0:?}")]
    UnknownClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemClass {
    RandomQp,
    EqConstrainedQp,
    Control,
    Huber,
    Svm,
    Lasso,
    Portfolio,
}

impl ProblemClass {
    pub const ALL: [ProblemClass; 7] = [
        ProblemClass::RandomQp,
        ProblemClass::EqConstrainedQp,
        ProblemClass::Control,
        ProblemClass::Huber,
        ProblemClass::Svm,
        ProblemClass::Lasso,
        ProblemClass::Portfolio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemClass::RandomQp => "random",
            ProblemClass::EqConstrainedQp => "eq",
            ProblemClass::Control => "control",
            ProblemClass::Huber => "huber",
            ProblemClass::Svm => "svm",
            ProblemClass::Lasso => "lasso",
            ProblemClass::Portfolio => "portfolio",
        }
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemClass {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ProblemError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub class: ProblemClass,
    /// The class's size parameter (the variable count for the random classes).
    pub dim: usize,
    pub density: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(class: ProblemClass, dim: usize, seed: u64) -> Self {
        Self { class, dim, density: DEFAULT_DENSITY, seed }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.dim < 2 {
            return Err(ProblemError::InvalidSpec(format!("dim must be at least 2, got {}", self.dim)));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(ProblemError::InvalidSpec(format!("density must lie in (0, 1], got {}", self.density)));
        }
        Ok(())
    }

    /// `class:dim:seed`, e.g. `random:20:7`.
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(ProblemError::InvalidSpec(format!("expected class:dim:seed, got {text:?}")));
        }
        let class = parts[0].parse()?;
        let dim = parts[1].parse().map_err(|_| ProblemError::InvalidSpec(format!("bad dim {:?}", parts[1])))?;
        let seed = parts[2].parse().map_err(|_| ProblemError::InvalidSpec(format!("bad seed {:?}", parts[2])))?;
        let spec = Self::new(class, dim, seed);
        spec.validate()?;
        Ok(spec)
    }

    fn rng(&self) -> ChaCha8Rng {
        let mixed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (self.dim as u64).rotate_left(32)
            ^ self.class.salt().rotate_left(56);
        ChaCha8Rng::seed_from_u64(mixed)
    }

    fn label(&self) -> String {
        format!("{}_{}_{}", self.class, self.dim, self.seed)
    }
}

/// A generated problem with its feasibility witness.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProblem {
    pub problem: QpProblem<f64>,
    pub witness: Vec<f64>,
}

/// Dispatches on the class; the unimplemented classes report `NotImplemented`.
pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedProblem, ProblemError> {
    spec.validate()?;
    match spec.class {
        ProblemClass::RandomQp => Ok(gen_random_qp(spec)),
        ProblemClass::EqConstrainedQp => Ok(gen_eq_qp(spec)),
        other => Err(ProblemError::NotImplemented(other)),
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Sparse `rows × cols` matrix with Bernoulli(`density`) pattern and N(0, 1) values.
/// Every row receives at least one entry.
fn sparse_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> CscMatrix<f64> {
    let mut triplets = Vec::new();
    let mut row_hit = vec![false; rows];
    for j in 0..cols {
        for (i, hit) in row_hit.iter_mut().enumerate() {
            if rng.random::<f64>() < density {
                triplets.push((i, j, normal(rng)));
                *hit = true;
            }
        }
    }
    for (i, hit) in row_hit.iter().enumerate() {
        if !hit {
            let j = rng.random_range(0..cols);
            triplets.push((i, j, normal(rng)));
        }
    }
    CscMatrix::from_triplets(rows, cols, &triplets).expect("indices in range")
}

/// Upper triangle of `M Mᵀ + 1e-2 I` for a sparse Gaussian `M`.
fn random_hessian(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CscMatrix<f64> {
    // (MMᵀ)_{ij} = Σ_k M_ik M_jk: accumulate outer products of the columns of M.
    let m = sparse_gaussian(rng, n, n, density);
    let mut upper = vec![0.0; n * n];
    for k in 0..m.ncols() {
        let col: Vec<(usize, f64)> = m.col(k).collect();
        for &(i, vi) in &col {
            for &(j, vj) in &col {
                if i <= j {
                    upper[j * n + i] += vi * vj;
                }
            }
        }
    }
    let mut triplets = Vec::new();
    for j in 0..n {
        for i in 0..=j {
            let mut v = upper[j * n + i];
            if i == j {
                v += 1e-2;
            }
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    CscMatrix::from_triplets(n, n, &triplets).expect("indices in range")
}

fn build(spec: &GeneratorSpec, m: usize, equality: bool) -> GeneratedProblem {
    let mut rng = spec.rng();
    let n = spec.dim;
    let p = random_hessian(&mut rng, n, spec.density);
    let a = sparse_gaussian(&mut rng, m, n, spec.density);
    let witness: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let ax0 = a.mul_vec(&witness);
    let (l, u) = if equality {
        (ax0.clone(), ax0)
    } else {
        let upper: Vec<f64> = ax0.iter().map(|&v| v + normal(&mut rng).abs()).collect();
        let lower: Vec<f64> = ax0.iter().map(|&v| v - normal(&mut rng).abs()).collect();
        (lower, upper)
    };
    let q = (0..n).map(|_| normal(&mut rng)).collect();
    let problem = QpProblem::new(p, q, a, l, u, spec.label()).expect("generator produces valid problems");
    GeneratedProblem { problem, witness }
}

/// Random QP: `n = dim`, `m = 10·⌈dim/10⌉`, `P = MMᵀ + 1e-2 I`, bounds straddling `A x₀`.
pub fn gen_random_qp(spec: &GeneratorSpec) -> GeneratedProblem {
    let m = 10 * spec.dim.div_ceil(10);
    build(spec, m, false)
}

/// Equality-constrained QP: `m = ⌈dim/2⌉` rows with `l = u = A x₀`.
pub fn gen_eq_qp(spec: &GeneratorSpec) -> GeneratedProblem {
    build(spec, spec.dim.div_ceil(2), true)
}

/// Random QP whose objective is scaled by `theta`: `(θP, θq)`. Scaling the objective
/// shifts the best fixed ρ proportionally, giving a one-parameter family.
pub fn gen_scaled_qp(spec: &GeneratorSpec, theta: f64) -> GeneratedProblem {
    let mut g = gen_random_qp(spec);
    g.problem.p.values_mut().iter_mut().for_each(|v| *v *= theta);
    g.problem.q.iter_mut().for_each(|v| *v *= theta);
    g.problem.name = format!("{}_theta{theta:.4e}", g.problem.name);
    g
}

/// Strictly increasing list of problem sizes for one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSchedule(Vec<usize>);

impl DimensionSchedule {
    pub fn new(dims: Vec<usize>) -> Result<Self, ProblemError> {
        if dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProblemError::InvalidSpec("schedule must be strictly increasing".into()));
        }
        Ok(Self(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

const RANDOM_EQ_DIMS: [usize; 20] =
    [10, 11, 12, 13, 15, 18, 23, 29, 39, 53, 73, 103, 146, 211, 304, 442, 644, 940, 1373, 2009];
const CONTROL_LIKE_DIMS: [usize; 20] =
    [10, 11, 12, 13, 14, 16, 17, 20, 23, 26, 31, 37, 45, 55, 68, 84, 105, 132, 166, 209];
const PORTFOLIO_DIMS: [usize; 20] = [5, 6, 7, 8, 9, 10, 12, 14, 16, 20, 24, 28, 35, 43, 52, 65, 80, 99, 124, 154];

pub fn schedule_default(class: ProblemClass) -> DimensionSchedule {
    let dims = match class {
        ProblemClass::RandomQp | ProblemClass::EqConstrainedQp => RANDOM_EQ_DIMS.to_vec(),
        ProblemClass::Control | ProblemClass::Huber | ProblemClass::Svm | ProblemClass::Lasso => {
            CONTROL_LIKE_DIMS.to_vec()
        }
        ProblemClass::Portfolio => PORTFOLIO_DIMS.to_vec(),
    };
    DimensionSchedule(dims)
}
