#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rlqp::linalg::CscMatrix;
use rlqp::solver::QpProblem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn dense_matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn dense_tr_matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().zip(x).map(|(row, xi)| row[j] * xi).sum()).collect()
}

/// Full symmetric matrix from a CSC upper triangle.
pub fn symmetric_dense(upper: &CscMatrix<f64>) -> Vec<Vec<f64>> {
    let mut d = upper.to_dense();
    let n = d.len();
    for i in 0..n {
        for j in 0..i {
            d[i][j] = d[j][i];
        }
    }
    d
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Small dense-ish random QP with a mix of two-sided, one-sided and equality rows.
pub fn small_problem(seed: u64, n: usize, m: usize) -> QpProblem<f64> {
    let mut r = rng(seed);
    let mut mm = vec![vec![0.0; n]; n];
    for row in mm.iter_mut() {
        for v in row.iter_mut() {
            if r.random::<f64>() < 0.5 {
                *v = normal(&mut r);
            }
        }
    }
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| mm[i][k] * mm[j][k]).sum();
            p[i][j] = v + if i == j { 0.1 } else { 0.0 };
        }
    }
    let mut a = vec![vec![0.0; n]; m];
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            if r.random::<f64>() < 0.6 {
                *v = normal(&mut r);
            }
        }
        if row.iter().all(|&v| v == 0.0) {
            row[r.random_range(0..n)] = 1.0;
        }
    }
    let x0: Vec<f64> = (0..n).map(|_| normal(&mut r)).collect();
    let ax0 = dense_matvec(&a, &x0);
    let mut l = Vec::with_capacity(m);
    let mut u = Vec::with_capacity(m);
    for v in ax0 {
        match r.random_range(0..4) {
            0 => {
                l.push(v);
                u.push(v);
            }
            1 => {
                l.push(f64::NEG_INFINITY);
                u.push(v + normal(&mut r).abs());
            }
            2 => {
                l.push(v - normal(&mut r).abs());
                u.push(f64::INFINITY);
            }
            _ => {
                l.push(v - normal(&mut r).abs());
                u.push(v + normal(&mut r).abs());
            }
        }
    }
    let q = (0..n).map(|_| normal(&mut r)).collect();
    QpProblem::new(CscMatrix::from_dense(&p), q, CscMatrix::from_dense(&a), l, u, format!("small_{seed}")).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    pub primal: f64,
    pub dual: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// Largest per-row complementary-slackness product.
    pub complementarity: f64,
    /// Largest violation of `l ≤ z ≤ u`.
    pub bound_violation: f64,
    /// Largest multiplier pushing against an infinite bound.
    pub sign_violation: f64,
}

/// Independent KKT check of `(x, y, z)` computed from dense copies of the data.
pub fn kkt_report(problem: &QpProblem<f64>, x: &[f64], y: &[f64], z: &[f64], eps: f64) -> KktReport {
    let p = symmetric_dense(&problem.p);
    let a = problem.a.to_dense();
    let ax = dense_matvec(&a, x);
    let px = dense_matvec(&p, x);
    let aty = dense_tr_matvec(&a, y);
    let primal = inf_norm(&ax.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>());
    let grad: Vec<f64> = (0..x.len()).map(|j| px[j] + problem.q[j] + aty[j]).collect();
    let dual = inf_norm(&grad);
    let primal_tol = eps + eps * inf_norm(&ax).max(inf_norm(z));
    let dual_tol = eps + eps * inf_norm(&px).max(inf_norm(&problem.q)).max(inf_norm(&aty));
    let mut complementarity: f64 = 0.0;
    let mut bound_violation: f64 = 0.0;
    let mut sign_violation: f64 = 0.0;
    for i in 0..y.len() {
        let (lo, hi) = (problem.l[i], problem.u[i]);
        bound_violation = bound_violation.max(lo - z[i]).max(z[i] - hi);
        let y_plus = y[i].max(0.0);
        let y_minus = (-y[i]).max(0.0);
        if hi.is_finite() {
            complementarity = complementarity.max(y_plus * (hi - z[i]).abs());
        } else {
            sign_violation = sign_violation.max(y_plus);
        }
        if lo.is_finite() {
            complementarity = complementarity.max(y_minus * (z[i] - lo).abs());
        } else {
            sign_violation = sign_violation.max(y_minus);
        }
    }
    KktReport { primal, dual, primal_tol, dual_tol, complementarity, bound_violation, sign_violation }
}

impl KktReport {
    pub fn ok(&self, slack_tol: f64) -> bool {
        self.primal <= self.primal_tol
            && self.dual <= self.dual_tol
            && self.complementarity <= slack_tol
            && self.bound_violation <= 1e-9
            && self.sign_violation <= 1e-9
    }
}

/// Straight-line dense ADMM with fixed ρ: reduced system
/// `(P + σI + Aᵀdiag(ρ)A) x = σx − q + Aᵀ(ρ∘z − y)`, `z̃ = Ax`, `z = Π(z̃ + y/ρ)`,
/// `y = y + ρ∘(z̃ − z)`.
pub struct DenseAdmm {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl DenseAdmm {
    pub fn cold(n: usize, m: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; m], z: vec![0.0; m] }
    }

    pub fn step(&mut self, problem: &QpProblem<f64>, sigma: f64, rho: &[f64]) {
        let n = self.x.len();
        let m = self.y.len();
        let p = symmetric_dense(&problem.p);
        let a = problem.a.to_dense();
        let mut lhs = p;
        for i in 0..n {
            lhs[i][i] += sigma;
            for j in 0..n {
                lhs[i][j] += (0..m).map(|k| a[k][i] * rho[k] * a[k][j]).sum::<f64>();
            }
        }
        let w: Vec<f64> = (0..m).map(|k| rho[k] * self.z[k] - self.y[k]).collect();
        let atw = dense_tr_matvec(&a, &w);
        let rhs: Vec<f64> = (0..n).map(|j| sigma * self.x[j] - problem.q[j] + atw[j]).collect();
        self.x = dense_solve(lhs, rhs);
        let z_tilde = dense_matvec(&a, &self.x);
        for k in 0..m {
            let z_new = (z_tilde[k] + self.y[k] / rho[k]).clamp(problem.l[k], problem.u[k]);
            self.y[k] += rho[k] * (z_tilde[k] - z_new);
            self.z[k] = z_new;
        }
    }
}
