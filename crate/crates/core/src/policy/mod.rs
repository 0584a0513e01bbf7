//! ρ-adaptation policies and the solver-state features the learned ones observe.

mod features;

pub use features::{
    featurize_scalar, featurize_vector, ConstraintObservation, ScalarObservation, CONSTRAINT_FEATURES,
    SCALAR_FEATURES,
};

use std::path::Path;

use thiserror::Error;

use crate::nn::{load_weights, Mlp, NnError};
use crate::solver::{heuristic_rho_update, rho_from_scalar, QpProblem, SolverSettings, SolverState};
use crate::Real;

/// Exponent scale of the action decoding `ρ = 10^(6a)`; maps the Tanh range onto `[1e-6, 1e6]`.
pub const ACTION_DECADES: f64 = 6.0;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy network: {0}")]
    Network(#[from] NnError),
    #[error("policy network has the wrong shape: {0}")]
    Shape(String),
    #[error("unknown policy {0:?} (expected fixed, heuristic, scalar:<weights> or vector:<weights>)")]
    Unknown(String),
}

/// A proposed ρ vector, and the scalar ρ̄ it was expanded from when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoUpdate<T> {
    pub rho: Vec<T>,
    pub rho_bar: Option<T>,
}

/// Maps the solver state to a new ρ within `settings.rho_bounds`.
///
/// Implementations are deterministic; exploration noise belongs to the trainer.
pub trait RhoPolicy<T: Real>: Send + Sync {
    fn name(&self) -> String;

    fn adapt(
        &self,
        state: &SolverState<T>,
        problem: &QpProblem<T>,
        settings: &SolverSettings<T>,
    ) -> Result<RhoUpdate<T>, PolicyError>;
}

/// `10^(6a)`.
pub fn decode_action<T: Real>(a: T) -> T {
    T::lit(10.0).powf(T::lit(ACTION_DECADES) * a)
}

/// Inverse of [`decode_action`].
pub fn encode_rho<T: Real>(rho: T) -> T {
    rho.log10() / T::lit(ACTION_DECADES)
}

/// Keeps the current ρ; equivalent to disabling adaptation.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPolicy;

impl<T: Real> RhoPolicy<T> for FixedPolicy {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn adapt(&self, state: &SolverState<T>, _: &QpProblem<T>, _: &SolverSettings<T>) -> Result<RhoUpdate<T>, PolicyError> {
        Ok(RhoUpdate { rho: state.rho.clone(), rho_bar: None })
    }
}

/// Residual balancing on ρ̄, expanded to a vector with the equality-row scale.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicPolicy;

impl<T: Real> RhoPolicy<T> for HeuristicPolicy {
    fn name(&self) -> String {
        "heuristic".into()
    }

    fn adapt(
        &self,
        state: &SolverState<T>,
        problem: &QpProblem<T>,
        settings: &SolverSettings<T>,
    ) -> Result<RhoUpdate<T>, PolicyError> {
        let rho_bar = heuristic_rho_update(state, settings.rho_bounds);
        let rho = rho_from_scalar(rho_bar, &problem.l, &problem.u, settings.equality_rho_scale, settings.rho_bounds);
        Ok(RhoUpdate { rho, rho_bar: Some(rho_bar) })
    }
}

/// Learned policy over the two log residuals, producing ρ̄.
#[derive(Debug, Clone)]
pub struct ScalarNetPolicy<T> {
    net: Mlp<T>,
}

impl<T: Real> ScalarNetPolicy<T> {
    pub fn new(net: Mlp<T>) -> Result<Self, PolicyError> {
        if net.input_width() != SCALAR_FEATURES || net.output_width() != 1 {
            return Err(PolicyError::Shape(format!(
                "scalar policy needs {SCALAR_FEATURES} inputs and 1 output, got {} and {}",
                net.input_width(),
                net.output_width()
            )));
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &Mlp<T> {
        &self.net
    }

    /// Raw network action in `(-1, 1)`.
    pub fn action(&self, obs: &ScalarObservation<T>) -> Result<T, PolicyError> {
        Ok(self.net.predict(&obs.to_input())?[0])
    }

    /// ρ̄ chosen for an observation, clamped to `bounds`.
    pub fn rho_bar(&self, obs: &ScalarObservation<T>, bounds: (T, T)) -> Result<T, PolicyError> {
        Ok(decode_action(self.action(obs)?).max(bounds.0).min(bounds.1))
    }
}

impl<T: Real> RhoPolicy<T> for ScalarNetPolicy<T> {
    fn name(&self) -> String {
        "scalar".into()
    }

    fn adapt(
        &self,
        state: &SolverState<T>,
        problem: &QpProblem<T>,
        settings: &SolverSettings<T>,
    ) -> Result<RhoUpdate<T>, PolicyError> {
        let rho_bar = self.rho_bar(&featurize_scalar(state), settings.rho_bounds)?;
        let rho = rho_from_scalar(rho_bar, &problem.l, &problem.u, settings.equality_rho_scale, settings.rho_bounds);
        Ok(RhoUpdate { rho, rho_bar: Some(rho_bar) })
    }
}

/// Learned per-constraint policy: one shared network applied to every row's features.
#[derive(Debug, Clone)]
pub struct VectorNetPolicy<T> {
    net: Mlp<T>,
}

impl<T: Real> VectorNetPolicy<T> {
    pub fn new(net: Mlp<T>) -> Result<Self, PolicyError> {
        if net.input_width() != CONSTRAINT_FEATURES || net.output_width() != 1 {
            return Err(PolicyError::Shape(format!(
                "vector policy needs {CONSTRAINT_FEATURES} inputs and 1 output, got {} and {}",
                net.input_width(),
                net.output_width()
            )));
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &Mlp<T> {
        &self.net
    }

    /// Raw network action for each row.
    pub fn actions(&self, obs: &[ConstraintObservation<T>]) -> Result<Vec<T>, PolicyError> {
        obs.iter().map(|o| Ok(self.net.predict(&o.to_input())?[0])).collect()
    }

    /// Decoded, clamped ρ for each row.
    pub fn rho(&self, obs: &[ConstraintObservation<T>], bounds: (T, T)) -> Result<Vec<T>, PolicyError> {
        Ok(self.actions(obs)?.into_iter().map(|a| decode_action(a).max(bounds.0).min(bounds.1)).collect())
    }
}

impl<T: Real> RhoPolicy<T> for VectorNetPolicy<T> {
    fn name(&self) -> String {
        "vector".into()
    }

    fn adapt(
        &self,
        state: &SolverState<T>,
        problem: &QpProblem<T>,
        settings: &SolverSettings<T>,
    ) -> Result<RhoUpdate<T>, PolicyError> {
        let rho = self.rho(&featurize_vector(state, problem), settings.rho_bounds)?;
        Ok(RhoUpdate { rho, rho_bar: None })
    }
}

/// Parses `fixed`, `heuristic`, `scalar:<weights>` or `vector:<weights>`.
pub fn parse_policy(text: &str) -> Result<Box<dyn RhoPolicy<f64>>, PolicyError> {
    match text.split_once(':') {
        None if text == "fixed" => Ok(Box::new(FixedPolicy)),
        None if text == "heuristic" => Ok(Box::new(HeuristicPolicy)),
        Some(("scalar", path)) => Ok(Box::new(ScalarNetPolicy::new(load_weights(Path::new(path))?)?)),
        Some(("vector", path)) => Ok(Box::new(VectorNetPolicy::new(load_weights(Path::new(path))?)?)),
        _ => Err(PolicyError::Unknown(text.to_string())),
    }
}
