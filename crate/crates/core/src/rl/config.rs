use serde::{Deserialize, Serialize};

use super::RlError;

/// TD3 hyperparameters and episode limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Td3Config {
    /// Std-dev of the Gaussian added to rollout actions, in network-action units.
    pub exploration_noise_sigma: f64,
    /// Std-dev of the target-policy smoothing noise.
    pub target_noise_sigma: f64,
    pub noise_clip: f64,
    pub polyak: f64,
    pub batch_size: usize,
    /// Env steps taken with uniformly random actions before the policy is used.
    pub initial_random_steps: usize,
    /// Env steps between update rounds; each round performs this many gradient steps.
    pub update_every: usize,
    pub steps_per_epoch: usize,
    pub test_episodes: usize,
    /// Critic updates per actor (and target) update.
    pub actor_delay: usize,
    pub gamma: f64,
    pub lr: f64,
    pub replay_capacity: usize,
    pub step_limit: usize,
    /// ADMM iterations per env step.
    pub inner_iters: usize,
    /// Episodes rolled out concurrently; 1 is the sequential reference behaviour.
    pub rollout_workers: usize,
}

impl Td3Config {
    /// Full-scale hyperparameters (days of compute and hundreds of GiB of replay).
    pub fn paper() -> Self {
        Self {
            exploration_noise_sigma: 1.0,
            target_noise_sigma: 1.0,
            noise_clip: 2.5,
            polyak: 0.995,
            batch_size: 5000,
            initial_random_steps: 100_000,
            update_every: 10_000,
            steps_per_epoch: 20_000,
            test_episodes: 10,
            actor_delay: 2,
            gamma: 0.99,
            lr: 1e-5,
            replay_capacity: 400_000_000,
            step_limit: 50,
            inner_iters: 100,
            rollout_workers: 1,
        }
    }

    /// Laptop-scale settings.
    pub fn desk() -> Self {
        Self {
            exploration_noise_sigma: 0.15,
            target_noise_sigma: 0.05,
            noise_clip: 0.15,
            polyak: 0.995,
            batch_size: 256,
            initial_random_steps: 1_000,
            update_every: 500,
            steps_per_epoch: 2_000,
            test_episodes: 50,
            actor_delay: 2,
            gamma: 0.99,
            lr: 1e-3,
            replay_capacity: 1_000_000,
            step_limit: 50,
            inner_iters: 100,
            rollout_workers: 1,
        }
    }

    pub fn preset(name: &str) -> Result<Self, RlError> {
        match name {
            "paper" => Ok(Self::paper()),
            "desk" => Ok(Self::desk()),
            other => Err(RlError::Config(format!("unknown preset {other:?} (expected desk or paper)"))),
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |msg: &str| Err(RlError::Config(msg.to_string()));
        let counts = [
            self.batch_size,
            self.update_every,
            self.steps_per_epoch,
            self.actor_delay,
            self.replay_capacity,
            self.step_limit,
            self.inner_iters,
            self.rollout_workers,
        ];
        if counts.contains(&0) {
            return bad("counts must be positive");
        }
        if !(self.exploration_noise_sigma >= 0.0 && self.target_noise_sigma >= 0.0 && self.noise_clip >= 0.0) {
            return bad("noise parameters must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.polyak) {
            return bad("polyak must lie in [0, 1]");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.replay_capacity < self.batch_size {
            return bad("replay_capacity must hold at least one batch");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        Td3Config::paper().validate().unwrap();
        Td3Config::desk().validate().unwrap();
        assert_eq!(Td3Config::preset("paper").unwrap().batch_size, 5000);
        assert!(Td3Config::preset("huge").is_err());
        let bad = Td3Config { actor_delay: 0, ..Td3Config::desk() };
        assert!(bad.validate().is_err());
        let bad = Td3Config { gamma: 1.0, ..Td3Config::desk() };
        assert!(bad.validate().is_err());
    }
}
