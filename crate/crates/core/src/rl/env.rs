use crate::policy::{decode_action, featurize_scalar, featurize_vector, CONSTRAINT_FEATURES, SCALAR_FEATURES};
use crate::solver::{rho_from_scalar, QpProblem, Solver, SolverSettings, Status};

use super::RlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvMode {
    /// One agent choosing ρ̄.
    Scalar,
    /// One agent per constraint row, sharing a policy.
    Vector,
}

impl EnvMode {
    pub fn obs_dim(self) -> usize {
        match self {
            EnvMode::Scalar => SCALAR_FEATURES,
            EnvMode::Vector => CONSTRAINT_FEATURES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvMode::Scalar => "scalar",
            EnvMode::Vector => "vector",
        }
    }
}

impl std::str::FromStr for EnvMode {
    type Err = RlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(EnvMode::Scalar),
            "vector" => Ok(EnvMode::Vector),
            other => Err(RlError::Config(format!("unknown mode {other:?} (expected scalar or vector)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// One network input per agent.
    pub obs: Vec<Vec<f64>>,
    pub reward: f64,
    pub done: bool,
    pub solved: bool,
}

/// A QP being solved, stepped `inner_iters` ADMM iterations at a time.
///
/// Every step writes ρ from the actions and refactors; the refactor tolerance used in
/// deployment is disabled.
pub struct QpEnv {
    solver: Solver<f64>,
    mode: EnvMode,
    steps_taken: usize,
    step_limit: usize,
    inner_iters: usize,
    done: bool,
}

impl QpEnv {
    /// Starts a cold solve with ρ expanded from `settings.rho_bar_init`. The env is
    /// ready for its first action immediately.
    pub fn new(
        problem: QpProblem<f64>,
        mode: EnvMode,
        settings: &SolverSettings<f64>,
        step_limit: usize,
        inner_iters: usize,
    ) -> Result<Self, RlError> {
        if step_limit == 0 || inner_iters == 0 {
            return Err(RlError::Config("step_limit and inner_iters must be positive".into()));
        }
        let settings = SolverSettings { rho_refactor_tol: None, ..settings.clone() };
        let solver = Solver::new(problem, settings)?;
        Ok(Self { solver, mode, steps_taken: 0, step_limit, inner_iters, done: false })
    }

    /// Like [`QpEnv::new`], then runs `inner_iters` iterations at the initial ρ so the
    /// first observation matches what a deployed policy sees at its first adaptation.
    /// Returns `None` when the warm-up alone solves the problem.
    pub fn reset(
        problem: QpProblem<f64>,
        mode: EnvMode,
        settings: &SolverSettings<f64>,
        step_limit: usize,
        inner_iters: usize,
    ) -> Result<Option<(Self, Vec<Vec<f64>>)>, RlError> {
        let mut env = Self::new(problem, mode, settings, step_limit, inner_iters)?;
        if env.solver.run_iterations(inner_iters) != Status::Running {
            return Ok(None);
        }
        let obs = env.observe();
        Ok(Some((env, obs)))
    }

    pub fn mode(&self) -> EnvMode {
        self.mode
    }

    pub fn solver(&self) -> &Solver<f64> {
        &self.solver
    }

    pub fn solver_mut(&mut self) -> &mut Solver<f64> {
        &mut self.solver
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn num_agents(&self) -> usize {
        match self.mode {
            EnvMode::Scalar => 1,
            EnvMode::Vector => self.solver.problem().m(),
        }
    }

    /// Current network inputs, one per agent.
    pub fn observe(&self) -> Vec<Vec<f64>> {
        let state = self.solver.state();
        match self.mode {
            EnvMode::Scalar => vec![featurize_scalar(state).to_input().to_vec()],
            EnvMode::Vector => featurize_vector(state, self.solver.problem())
                .iter()
                .map(|o| o.to_input().to_vec())
                .collect(),
        }
    }

    /// ρ implied by network actions (clamped to `[-1, 1]` before decoding).
    pub fn decode(&self, actions: &[f64]) -> (Vec<f64>, Option<f64>) {
        let settings = self.solver.settings();
        let dec = |a: f64| settings.clamp_rho(decode_action(a.clamp(-1.0, 1.0)));
        match self.mode {
            EnvMode::Scalar => {
                let rho_bar = dec(actions[0]);
                let p = self.solver.problem();
                let rho = rho_from_scalar(rho_bar, &p.l, &p.u, settings.equality_rho_scale, settings.rho_bounds);
                (rho, Some(rho_bar))
            }
            EnvMode::Vector => (actions.iter().map(|&a| dec(a)).collect(), None),
        }
    }

    pub fn step(&mut self, actions: &[f64]) -> Result<StepOutcome, RlError> {
        if self.done {
            return Err(RlError::EpisodeFinished);
        }
        if actions.len() != self.num_agents() {
            return Err(RlError::Shape(format!("{} actions for {} agents", actions.len(), self.num_agents())));
        }
        let (rho, rho_bar) = self.decode(actions);
        self.solver.set_rho(rho, rho_bar)?;
        let status = self.solver.run_iterations(self.inner_iters);
        self.steps_taken += 1;
        let solved = status == Status::Solved;
        self.done = solved || status != Status::Running || self.steps_taken >= self.step_limit;
        Ok(StepOutcome { obs: self.observe(), reward: if solved { 0.0 } else { -1.0 }, done: self.done, solved })
    }
}
