use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bench::{shifted_geomean, DEFAULT_SHIFT};
use crate::nn::Mlp;
use crate::policy::{RhoPolicy, ScalarNetPolicy, VectorNetPolicy};
use crate::problems::{gen_scaled_qp, generate, GeneratorSpec, ProblemClass, VALIDATION_SEED_BASE};
use crate::solver::{solve, QpProblem, SolverSettings};

use super::{EnvMode, QpEnv, ReplayBuffer, RlError, Td3Agent, Td3Config, Transition, UpdateStats};

const MAX_RESET_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub mode: EnvMode,
    pub class: ProblemClass,
    /// Inclusive range of problem sizes drawn uniformly per episode.
    pub dims: (usize, usize),
    pub epochs: usize,
    pub seed: u64,
    /// When set, objectives are scaled by θ drawn log-uniformly from this range
    /// (see [`gen_scaled_qp`]); only valid for `RandomQp`.
    pub objective_scale: Option<(f64, f64)>,
    pub settings: SolverSettings<f64>,
    pub config: Td3Config,
}

impl TrainSpec {
    pub fn validate(&self) -> Result<(), RlError> {
        self.config.validate()?;
        self.settings.validate()?;
        if self.dims.0 < 2 || self.dims.0 > self.dims.1 {
            return Err(RlError::Config(format!("bad dimension range {:?}", self.dims)));
        }
        if let Some((lo, hi)) = self.objective_scale {
            if self.class != ProblemClass::RandomQp || !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(RlError::Config(format!("bad objective scale range {:?} for {}", (lo, hi), self.class)));
            }
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub pi_loss: Option<f64>,
    pub q_loss: Option<f64>,
    pub avg_q: Option<f64>,
    pub train_ep_len_avg: f64,
    pub train_ep_len_max: usize,
    pub train_ep_len_std: f64,
    pub test_ep_len_avg: f64,
    /// Shifted geomean of deployment iterations on the validation problems.
    pub test_iters_geomean: f64,
    pub total_steps: usize,
}

pub struct TrainOutcome {
    pub agent: Td3Agent,
    pub logs: Vec<EpochLog>,
    /// Actor snapshot with the lowest `test_iters_geomean`, earliest on ties.
    pub best_actor: Mlp<f64>,
    pub best_epoch: usize,
}

/// How rollout actions are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    Uniform,
    /// Policy action plus clipped Gaussian noise.
    Gaussian { sigma: f64, clip: f64 },
    Greedy,
}

fn choose_actions<R: Rng + ?Sized>(
    actor: &Mlp<f64>,
    obs: &[Vec<f64>],
    exploration: Exploration,
    rng: &mut R,
) -> Result<Vec<f64>, RlError> {
    obs.iter()
        .map(|o| {
            Ok(match exploration {
                Exploration::Uniform => rng.random_range(-1.0..=1.0),
                Exploration::Greedy => actor.predict(o)?[0],
                Exploration::Gaussian { sigma, clip } => {
                    let eps: f64 = rng.sample(StandardNormal);
                    (actor.predict(o)?[0] + (sigma * eps).clamp(-clip, clip)).clamp(-1.0, 1.0)
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub transitions: Vec<Transition>,
    /// Env steps taken; 0 when the warm-up alone solved the problem.
    pub length: usize,
    pub solved: bool,
}

/// Runs one full episode with a frozen actor.
pub fn run_episode<R: Rng + ?Sized>(
    actor: &Mlp<f64>,
    problem: QpProblem<f64>,
    mode: EnvMode,
    settings: &SolverSettings<f64>,
    config: &Td3Config,
    exploration: Exploration,
    rng: &mut R,
) -> Result<EpisodeResult, RlError> {
    let Some((mut env, mut obs)) = QpEnv::reset(problem, mode, settings, config.step_limit, config.inner_iters)? else {
        return Ok(EpisodeResult { transitions: Vec::new(), length: 0, solved: true });
    };
    let mut transitions = Vec::new();
    loop {
        let actions = choose_actions(actor, &obs, exploration, rng)?;
        let out = env.step(&actions)?;
        for ((s, a), s_next) in obs.into_iter().zip(&actions).zip(&out.obs) {
            transitions.push(Transition { s, a: *a, r: out.reward, s_next: s_next.clone(), done: out.solved });
        }
        obs = out.obs;
        if out.done {
            return Ok(EpisodeResult { transitions, length: env.steps_taken(), solved: out.solved });
        }
    }
}

fn make_problem<R: Rng + ?Sized>(spec: &TrainSpec, seed: u64, rng: &mut R) -> Result<QpProblem<f64>, RlError> {
    let dim = rng.random_range(spec.dims.0..=spec.dims.1);
    let gen = GeneratorSpec::new(spec.class, dim, seed);
    Ok(match spec.objective_scale {
        None => generate(&gen)?.problem,
        Some((lo, hi)) => {
            gen.validate()?;
            let theta = (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp();
            gen_scaled_qp(&gen, theta).problem
        }
    })
}

fn draw_problem<R: Rng + ?Sized>(spec: &TrainSpec, rng: &mut R) -> Result<QpProblem<f64>, RlError> {
    let seed = rng.random_range(0..VALIDATION_SEED_BASE);
    make_problem(spec, seed, rng)
}

/// Draws problems until one is still unsolved after the warm-up.
fn fresh_env<R: Rng + ?Sized>(spec: &TrainSpec, rng: &mut R) -> Result<(QpEnv, Vec<Vec<f64>>), RlError> {
    for _ in 0..MAX_RESET_ATTEMPTS {
        let problem = draw_problem(spec, rng)?;
        let reset = QpEnv::reset(problem, spec.mode, &spec.settings, spec.config.step_limit, spec.config.inner_iters)?;
        if let Some(started) = reset {
            return Ok(started);
        }
    }
    Err(RlError::NoProblems(MAX_RESET_ATTEMPTS))
}

fn test_problems(spec: &TrainSpec) -> Result<Vec<QpProblem<f64>>, RlError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x7E57);
    (0..spec.config.test_episodes)
        .map(|i| make_problem(spec, VALIDATION_SEED_BASE + i as u64, &mut rng))
        .collect()
}

#[derive(Default)]
struct StatAccumulator {
    q_loss: Vec<f64>,
    avg_q: Vec<f64>,
    pi_loss: Vec<f64>,
}

impl StatAccumulator {
    fn add(&mut self, s: UpdateStats) {
        self.q_loss.push(s.q_loss);
        self.avg_q.push(s.avg_q);
        if let Some(p) = s.pi_loss {
            self.pi_loss.push(p);
        }
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

struct Trainer<'a> {
    spec: &'a TrainSpec,
    agent: Td3Agent,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    total_steps: usize,
    stats: StatAccumulator,
}

impl Trainer<'_> {
    fn exploration(&self) -> Exploration {
        let c = &self.spec.config;
        if self.total_steps < c.initial_random_steps {
            Exploration::Uniform
        } else {
            Exploration::Gaussian { sigma: c.exploration_noise_sigma, clip: c.noise_clip }
        }
    }

    /// Runs the gradient steps owed for env steps `before..after`.
    fn catch_up_updates(&mut self, before: usize, after: usize) -> Result<(), RlError> {
        let c = &self.spec.config;
        let rounds = after / c.update_every - before / c.update_every;
        if after < c.initial_random_steps || self.buffer.len() < c.batch_size {
            return Ok(());
        }
        for _ in 0..rounds * c.update_every {
            let batch = self.buffer.sample(c.batch_size, &mut self.rng)?;
            let stats = self.agent.update(&batch, c, &mut self.rng)?;
            self.stats.add(stats);
        }
        Ok(())
    }

    /// Steps one episode at a time, interleaving updates at `update_every` boundaries.
    /// An episode running at the epoch boundary is finished first.
    fn sequential_epoch(&mut self) -> Result<Vec<usize>, RlError> {
        let mut lengths = Vec::new();
        let mut epoch_steps = 0;
        let mut current: Option<(QpEnv, Vec<Vec<f64>>)> = None;
        while epoch_steps < self.spec.config.steps_per_epoch || current.is_some() {
            let (mut env, obs) = match current.take() {
                Some(started) => started,
                None => fresh_env(self.spec, &mut self.rng)?,
            };
            let exploration = self.exploration();
            let actions = choose_actions(&self.agent.actor, &obs, exploration, &mut self.rng)?;
            let out = env.step(&actions)?;
            for ((s, a), s_next) in obs.into_iter().zip(&actions).zip(&out.obs) {
                self.buffer.push(&Transition { s, a: *a, r: out.reward, s_next: s_next.clone(), done: out.solved })?;
            }
            self.total_steps += 1;
            epoch_steps += 1;
            self.catch_up_updates(self.total_steps - 1, self.total_steps)?;
            if out.done {
                lengths.push(env.steps_taken());
            } else {
                current = Some((env, out.obs));
            }
        }
        Ok(lengths)
    }

    /// Runs `rollout_workers` whole episodes at a time against a frozen actor, then
    /// appends their transitions in worker order and performs the owed updates.
    fn concurrent_epoch(&mut self) -> Result<Vec<usize>, RlError> {
        let workers = self.spec.config.rollout_workers;
        let mut lengths = Vec::new();
        let mut epoch_steps = 0;
        while epoch_steps < self.spec.config.steps_per_epoch {
            let exploration = self.exploration();
            let jobs: Vec<(QpProblem<f64>, u64)> = (0..workers)
                .map(|_| Ok((draw_problem(self.spec, &mut self.rng)?, self.rng.random())))
                .collect::<Result<_, RlError>>()?;
            let actor = &self.agent.actor;
            let spec = self.spec;
            let results: Vec<Result<EpisodeResult, RlError>> = std::thread::scope(|scope| {
                let handles: Vec<_> = jobs
                    .into_iter()
                    .map(|(problem, seed)| {
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            run_episode(actor, problem, spec.mode, &spec.settings, &spec.config, exploration, &mut rng)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("rollout worker panicked")).collect()
            });
            let before = self.total_steps;
            for result in results {
                let episode = result?;
                if episode.length == 0 {
                    continue;
                }
                for t in &episode.transitions {
                    self.buffer.push(t)?;
                }
                self.total_steps += episode.length;
                epoch_steps += episode.length;
                lengths.push(episode.length);
            }
            self.catch_up_updates(before, self.total_steps)?;
        }
        Ok(lengths)
    }

    fn test_lengths(&self, problems: &[QpProblem<f64>]) -> Result<Vec<usize>, RlError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        problems
            .iter()
            .map(|p| {
                let r = run_episode(
                    &self.agent.actor,
                    p.clone(),
                    self.spec.mode,
                    &self.spec.settings,
                    &self.spec.config,
                    Exploration::Greedy,
                    &mut rng,
                )?;
                Ok(r.length)
            })
            .collect()
    }

    /// Solves each problem with the current actor deployed as a policy.
    fn test_iterations(&self, problems: &[QpProblem<f64>]) -> Result<f64, RlError> {
        let actor = self.agent.actor.clone();
        let shape = |e: crate::policy::PolicyError| RlError::Shape(e.to_string());
        let policy: Box<dyn RhoPolicy<f64>> = match self.spec.mode {
            EnvMode::Scalar => Box::new(ScalarNetPolicy::new(actor).map_err(shape)?),
            EnvMode::Vector => Box::new(VectorNetPolicy::new(actor).map_err(shape)?),
        };
        let mut iters = Vec::with_capacity(problems.len());
        for p in problems {
            iters.push(solve(p, &self.spec.settings, policy.as_ref(), None)?.iterations as f64);
        }
        Ok(shifted_geomean(&iters, DEFAULT_SHIFT).unwrap_or(0.0))
    }
}

/// Trains a policy. `on_epoch` sees each log record as soon as it is produced.
///
/// With one rollout worker the result is a deterministic function of `spec`.
pub fn train(spec: &TrainSpec, on_epoch: &mut dyn FnMut(&EpochLog)) -> Result<TrainOutcome, RlError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let agent = Td3Agent::new(spec.mode.obs_dim(), spec.config.lr, &mut rng)?;
    let mut trainer = Trainer {
        spec,
        agent,
        buffer: ReplayBuffer::new(spec.config.replay_capacity, spec.mode.obs_dim()),
        rng,
        total_steps: 0,
        stats: StatAccumulator::default(),
    };
    let tests = test_problems(spec)?;
    let mut logs = Vec::with_capacity(spec.epochs);
    let mut best: Option<(f64, usize, Mlp<f64>)> = None;
    for epoch in 0..spec.epochs {
        trainer.stats = StatAccumulator::default();
        let lengths = if spec.config.rollout_workers > 1 {
            trainer.concurrent_epoch()?
        } else {
            trainer.sequential_epoch()?
        };
        let test = trainer.test_lengths(&tests)?;
        let test_iters = trainer.test_iterations(&tests)?;
        if best.as_ref().is_none_or(|b| test_iters < b.0) {
            best = Some((test_iters, epoch, trainer.agent.actor.clone()));
        }
        let lens: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
        let avg = mean(&lens).unwrap_or(0.0);
        let var = mean(&lens.iter().map(|l| (l - avg) * (l - avg)).collect::<Vec<_>>()).unwrap_or(0.0);
        let log = EpochLog {
            epoch,
            pi_loss: mean(&trainer.stats.pi_loss),
            q_loss: mean(&trainer.stats.q_loss),
            avg_q: mean(&trainer.stats.avg_q),
            train_ep_len_avg: avg,
            train_ep_len_max: lengths.iter().copied().max().unwrap_or(0),
            train_ep_len_std: var.sqrt(),
            test_ep_len_avg: mean(&test.iter().map(|&l| l as f64).collect::<Vec<_>>()).unwrap_or(0.0),
            test_iters_geomean: test_iters,
            total_steps: trainer.total_steps,
        };
        on_epoch(&log);
        logs.push(log);
    }
    let (best_epoch, best_actor) = match best {
        Some((_, epoch, actor)) => (epoch, actor),
        None => (0, trainer.agent.actor.clone()),
    };
    Ok(TrainOutcome { agent: trainer.agent, logs, best_actor, best_epoch })
}
