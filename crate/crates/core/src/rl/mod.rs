//! TD3 training of the scalar (ρ̄) and per-constraint (ρ) policies.

mod buffer;
mod config;
mod env;
mod td3;
mod train;

pub use buffer::{Batch, ReplayBuffer, Transition};
pub use config::Td3Config;
pub use env::{EnvMode, QpEnv, StepOutcome};
pub use td3::{Td3Agent, UpdateStats};
pub use train::{run_episode, train, EpisodeResult, EpochLog, Exploration, TrainOutcome, TrainSpec};

use thiserror::Error;

use crate::nn::NnError;
use crate::problems::ProblemError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite transition")]
    NonFinite,
    #[error("replay buffer holds {have} transitions, batch needs {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("could not draw an unsolved training problem after {0} attempts")]
    NoProblems(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Network(#[from] NnError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
