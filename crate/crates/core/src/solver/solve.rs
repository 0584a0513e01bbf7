use std::time::Instant;

use crate::linalg::{assemble_kkt, KktSystem, LdlFactor};
use crate::policy::{RhoPolicy, RhoUpdate};
use crate::Real;

use super::{
    admm_iterate, check_termination, compute_residuals, rho_from_scalar, AdmmWork, QpProblem, SolverError,
    SolverSettings, SolverState, Status,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    pub status: Status,
    pub iterations: usize,
    pub solve_time: f64,
    /// Number of times a policy proposal was applied (each costs a refactorization).
    pub adapt_count: usize,
    pub objective: T,
    pub xi_primal: T,
    pub xi_dual: T,
    pub rho_bar: T,
    pub diagnostic: Option<String>,
}

/// One solver instance: problem, KKT matrix, factorization and iterates.
#[derive(Debug, Clone)]
pub struct Solver<T> {
    problem: QpProblem<T>,
    settings: SolverSettings<T>,
    kkt: KktSystem<T>,
    factor: LdlFactor<T>,
    state: SolverState<T>,
    work: AdmmWork<T>,
    adapt_count: usize,
}

impl<T: Real> Solver<T> {
    /// Sets up a cold-started solver with `ρ = rho_from_scalar(rho_bar_init)`.
    pub fn new(problem: QpProblem<T>, settings: SolverSettings<T>) -> Result<Self, SolverError> {
        problem.validate()?;
        settings.validate()?;
        let rho_bar = settings.clamp_rho(settings.rho_bar_init);
        let rho = rho_from_scalar(rho_bar, &problem.l, &problem.u, settings.equality_rho_scale, settings.rho_bounds);
        let kkt = assemble_kkt(&problem.p, &problem.a, settings.sigma, &rho)?;
        let factor = LdlFactor::new(kkt.matrix())?;
        let state = SolverState::cold(problem.n(), rho, rho_bar);
        let work = AdmmWork::new(problem.n(), problem.m());
        Ok(Self { problem, settings, kkt, factor, state, work, adapt_count: 0 })
    }

    /// Initializes `x` and `y`; `z` becomes `Π(Ax)`.
    pub fn warm_start(&mut self, x: &[T], y: &[T]) -> Result<(), SolverError> {
        if x.len() != self.problem.n() || y.len() != self.problem.m() {
            return Err(SolverError::WarmStart(format!(
                "x has {} entries (expected {}), y has {} (expected {})",
                x.len(),
                self.problem.n(),
                y.len(),
                self.problem.m()
            )));
        }
        self.state.x.copy_from_slice(x);
        self.state.y.copy_from_slice(y);
        self.problem.a.mul_vec_into(x, &mut self.state.ax);
        for i in 0..self.problem.m() {
            self.state.z[i] = self.state.ax[i].max(self.problem.l[i]).min(self.problem.u[i]);
        }
        self.update_residuals();
        Ok(())
    }

    pub fn problem(&self) -> &QpProblem<T> {
        &self.problem
    }

    pub fn settings(&self) -> &SolverSettings<T> {
        &self.settings
    }

    pub fn state(&self) -> &SolverState<T> {
        &self.state
    }

    pub fn factor(&self) -> &LdlFactor<T> {
        &self.factor
    }

    pub fn kkt(&self) -> &KktSystem<T> {
        &self.kkt
    }

    pub fn adapt_count(&self) -> usize {
        self.adapt_count
    }

    /// One ADMM iteration; residuals are not refreshed.
    pub fn iterate(&mut self) {
        admm_iterate(&mut self.state, &self.problem, &self.factor, self.settings.sigma, &mut self.work);
    }

    pub fn update_residuals(&mut self) {
        let (p, d) = compute_residuals(&self.state, &self.problem);
        self.state.xi_primal = p;
        self.state.xi_dual = d;
    }

    /// Writes a new ρ (and optionally ρ̄) and refactors the KKT matrix.
    pub fn set_rho(&mut self, rho: Vec<T>, rho_bar: Option<T>) -> Result<(), SolverError> {
        self.kkt.update_rho_entries(&rho)?;
        self.factor.refactor(self.kkt.matrix())?;
        self.state.rho = rho;
        if let Some(rb) = rho_bar {
            self.state.rho_bar = rb;
        }
        self.adapt_count += 1;
        Ok(())
    }

    /// Applies `update` unless every entry is within the refactorization tolerance of
    /// the current ρ. Returns whether ρ changed.
    pub fn apply_update(&mut self, update: RhoUpdate<T>) -> Result<bool, SolverError> {
        let significant = match self.settings.rho_refactor_tol {
            None => true,
            Some(tol) => update.rho.iter().zip(&self.state.rho).any(|(&new, &old)| {
                let ratio = new / old;
                ratio > tol || ratio < tol.recip()
            }),
        };
        if significant {
            self.set_rho(update.rho, update.rho_bar)?;
        }
        Ok(significant)
    }

    /// Termination check on the current iterate (refreshes residuals).
    fn check(&mut self, start: &Instant) -> Status {
        self.update_residuals();
        let mut status = check_termination(&self.state, &self.settings, &self.problem);
        if status == Status::Running {
            if let Some(limit) = self.settings.time_limit {
                if start.elapsed().as_secs_f64() > limit {
                    status = Status::TimeLimit;
                }
            }
        }
        self.state.status = status;
        status
    }

    /// Runs up to `iterations` ADMM steps, checking termination every
    /// `check_termination` iterations. Stops early once the status leaves `Running`.
    pub fn run_iterations(&mut self, iterations: usize) -> Status {
        let start = Instant::now();
        for _ in 0..iterations {
            self.iterate();
            if self.state.iter % self.settings.check_termination == 0 || self.state.iter >= self.settings.max_iter {
                if self.check(&start) != Status::Running {
                    break;
                }
            }
        }
        self.state.status
    }

    /// Runs ADMM to termination, consulting `policy` every `adapt_interval` iterations.
    pub fn solve(&mut self, policy: &dyn RhoPolicy<T>) -> SolveResult<T> {
        let start = Instant::now();
        let mut diagnostic = None;
        self.state.status = Status::Running;
        while self.state.iter < self.settings.max_iter {
            self.iterate();
            let iter = self.state.iter;
            if iter % self.settings.check_termination != 0 && iter < self.settings.max_iter {
                continue;
            }
            if self.check(&start) != Status::Running {
                break;
            }
            if iter % self.settings.adapt_interval == 0 {
                let outcome = policy
                    .adapt(&self.state, &self.problem, &self.settings)
                    .map_err(|e| e.to_string())
                    .and_then(|update| self.apply_update(update).map_err(|e| e.to_string()));
                if let Err(msg) = outcome {
                    diagnostic = Some(format!("policy {}: {msg}", policy.name()));
                    self.state.status = Status::NonConvergent;
                    break;
                }
            }
        }
        if self.state.status == Status::Running {
            self.state.status = Status::IterationLimit;
        }
        self.result(start.elapsed().as_secs_f64(), diagnostic)
    }

    fn result(&self, solve_time: f64, diagnostic: Option<String>) -> SolveResult<T> {
        SolveResult {
            x: self.state.x.clone(),
            y: self.state.y.clone(),
            z: self.state.z.clone(),
            status: self.state.status,
            iterations: self.state.iter,
            solve_time,
            adapt_count: self.adapt_count,
            objective: self.problem.objective(&self.state.x),
            xi_primal: self.state.xi_primal,
            xi_dual: self.state.xi_dual,
            rho_bar: self.state.rho_bar,
            diagnostic,
        }
    }
}

/// Sets up a solver, optionally warm-started from `(x, y)`, and solves.
pub fn solve<T: Real>(
    problem: &QpProblem<T>,
    settings: &SolverSettings<T>,
    policy: &dyn RhoPolicy<T>,
    warm_start: Option<(&[T], &[T])>,
) -> Result<SolveResult<T>, SolverError> {
    let mut solver = Solver::new(problem.clone(), settings.clone())?;
    if let Some((x, y)) = warm_start {
        solver.warm_start(x, y)?;
    }
    Ok(solver.solve(policy))
}
