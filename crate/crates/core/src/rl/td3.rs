use rand::Rng;
use rand_distr::StandardNormal;

use crate::nn::{adam_step, polyak_update, AdamState, Mlp, MlpSpec};

use super::{Batch, RlError, Td3Config};

/// Actor, twin critics and their targets, with one Adam state per online network.
#[derive(Debug, Clone)]
pub struct Td3Agent {
    pub actor: Mlp<f64>,
    pub critic1: Mlp<f64>,
    pub critic2: Mlp<f64>,
    pub actor_target: Mlp<f64>,
    pub critic1_target: Mlp<f64>,
    pub critic2_target: Mlp<f64>,
    pub actor_opt: AdamState<f64>,
    pub critic1_opt: AdamState<f64>,
    pub critic2_opt: AdamState<f64>,
    critic_updates: u64,
    obs_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    /// Sum of both critics' mean squared errors.
    pub q_loss: f64,
    /// Mean first-critic value on the batch.
    pub avg_q: f64,
    /// `-mean Q₁(s, π(s))`, when the actor was updated.
    pub pi_loss: Option<f64>,
}

fn concat(s: &[f64], a: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(s.len() + 1);
    v.extend_from_slice(s);
    v.push(a);
    v
}

impl Td3Agent {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, lr: f64, rng: &mut R) -> Result<Self, RlError> {
        let actor = Mlp::init(MlpSpec::policy(obs_dim), rng)?;
        let critic1 = Mlp::init(MlpSpec::critic(obs_dim + 1), rng)?;
        let critic2 = Mlp::init(MlpSpec::critic(obs_dim + 1), rng)?;
        Self::from_networks(actor, critic1, critic2, lr)
    }

    /// Targets start as copies of the online networks.
    pub fn from_networks(actor: Mlp<f64>, critic1: Mlp<f64>, critic2: Mlp<f64>, lr: f64) -> Result<Self, RlError> {
        let obs_dim = actor.input_width();
        if actor.output_width() != 1 {
            return Err(RlError::Shape("actor must have one output".into()));
        }
        for c in [&critic1, &critic2] {
            if c.input_width() != obs_dim + 1 || c.output_width() != 1 {
                return Err(RlError::Shape("critics take (observation, action) and return one value".into()));
            }
        }
        Ok(Self {
            actor_opt: AdamState::new(actor.num_params(), lr),
            critic1_opt: AdamState::new(critic1.num_params(), lr),
            critic2_opt: AdamState::new(critic2.num_params(), lr),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            critic_updates: 0,
            obs_dim,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    /// Deterministic action of the online actor.
    pub fn act(&self, obs: &[f64]) -> Result<f64, RlError> {
        Ok(self.actor.predict(obs)?[0])
    }

    /// `r + γ(1 − done)·min(Q₁ᵗ, Q₂ᵗ)(s′, clamp(πᵗ(s′) + noise, −1, 1))` for an already
    /// clipped smoothing `noise`.
    pub fn target_value(&self, r: f64, s_next: &[f64], done: bool, gamma: f64, noise: f64) -> Result<f64, RlError> {
        if done {
            return Ok(r);
        }
        let a_next = (self.actor_target.predict(s_next)?[0] + noise).clamp(-1.0, 1.0);
        let input = concat(s_next, a_next);
        let q1 = self.critic1_target.predict(&input)?[0];
        let q2 = self.critic2_target.predict(&input)?[0];
        Ok(r + gamma * q1.min(q2))
    }

    /// Bellman targets for a batch, drawing clipped smoothing noise per sample.
    pub fn targets<R: Rng + ?Sized>(&self, batch: &Batch, config: &Td3Config, rng: &mut R) -> Result<Vec<f64>, RlError> {
        (0..batch.len())
            .map(|k| {
                let eps: f64 = rng.sample(StandardNormal);
                let noise = (config.target_noise_sigma * eps).clamp(-config.noise_clip, config.noise_clip);
                self.target_value(batch.r[k], batch.s_next(k), batch.done[k], config.gamma, noise)
            })
            .collect()
    }

    /// One Adam step on each critic toward `targets`. Returns (summed loss, mean Q₁).
    pub fn critic_step(&mut self, batch: &Batch, targets: &[f64]) -> Result<(f64, f64), RlError> {
        let b = batch.len();
        if b == 0 || targets.len() != b {
            return Err(RlError::Shape(format!("{} targets for a batch of {b}", targets.len())));
        }
        let scale = 1.0 / b as f64;
        let mut total_loss = 0.0;
        let mut avg_q = 0.0;
        for (which, (net, opt)) in
            [(&mut self.critic1, &mut self.critic1_opt), (&mut self.critic2, &mut self.critic2_opt)].into_iter().enumerate()
        {
            let mut grads = vec![0.0; net.num_params()];
            for k in 0..b {
                let (out, tape) = net.forward(&concat(batch.s(k), batch.a[k]))?;
                let diff = out[0] - targets[k];
                total_loss += diff * diff * scale;
                if which == 0 {
                    avg_q += out[0] * scale;
                }
                net.backward(&tape, &[2.0 * diff * scale], &mut grads)?;
            }
            adam_step(net.params_mut(), &grads, opt)?;
        }
        Ok((total_loss, avg_q))
    }

    /// Gradient of `-mean Q₁(s, π(s))` with respect to the actor parameters, and the
    /// objective value.
    pub fn actor_gradient(&self, batch: &Batch) -> Result<(Vec<f64>, f64), RlError> {
        let b = batch.len();
        let scale = 1.0 / b as f64;
        let mut grads = vec![0.0; self.actor.num_params()];
        let mut critic_scratch = vec![0.0; self.critic1.num_params()];
        let mut objective = 0.0;
        for k in 0..b {
            let s = batch.s(k);
            let (a, actor_tape) = self.actor.forward(s)?;
            let (q, critic_tape) = self.critic1.forward(&concat(s, a[0]))?;
            objective -= q[0] * scale;
            let input_grad = self.critic1.backward(&critic_tape, &[-scale], &mut critic_scratch)?;
            self.actor.backward(&actor_tape, &[input_grad[self.obs_dim]], &mut grads)?;
        }
        Ok((grads, objective))
    }

    /// One Adam step on the actor, then polyak averaging of all three targets.
    pub fn actor_step(&mut self, batch: &Batch, polyak: f64) -> Result<f64, RlError> {
        let (grads, objective) = self.actor_gradient(batch)?;
        adam_step(self.actor.params_mut(), &grads, &mut self.actor_opt)?;
        polyak_update(&mut self.actor_target, &self.actor, polyak)?;
        polyak_update(&mut self.critic1_target, &self.critic1, polyak)?;
        polyak_update(&mut self.critic2_target, &self.critic2, polyak)?;
        Ok(objective)
    }

    /// Critic update, plus an actor update every `actor_delay` critic updates.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch, config: &Td3Config, rng: &mut R) -> Result<UpdateStats, RlError> {
        let targets = self.targets(batch, config, rng)?;
        let (q_loss, avg_q) = self.critic_step(batch, &targets)?;
        self.critic_updates += 1;
        let pi_loss = if self.critic_updates % config.actor_delay as u64 == 0 {
            Some(self.actor_step(batch, config.polyak)?)
        } else {
            None
        };
        Ok(UpdateStats { q_loss, avg_q, pi_loss })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use crate::rl::Transition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agent(seed: u64) -> Td3Agent {
        Td3Agent::new(2, 1e-3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn batch(done: bool, r: f64) -> Batch {
        let t = Transition { s: vec![0.1, -0.2], a: 0.3, r, s_next: vec![0.2, 0.1], done };
        Batch::from_transitions(2, &[t.clone(), t])
    }

    #[test]
    fn terminal_batch_targets_are_rewards() {
        let a = agent(0);
        let cfg = Td3Config::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(a.targets(&batch(true, 0.0), &cfg, &mut rng).unwrap(), vec![0.0, 0.0]);
        let no_discount = Td3Config { gamma: 0.0, ..cfg };
        assert_eq!(a.targets(&batch(false, -1.0), &no_discount, &mut rng).unwrap(), vec![-1.0, -1.0]);
    }

    #[test]
    fn constant_critic_gives_zero_actor_gradient() {
        let mut a = agent(1);
        // Zero every critic weight, leaving only a constant output bias.
        let spec = MlpSpec { output_activation: Activation::Identity, ..MlpSpec::critic(3) };
        let mut params = vec![0.0; spec.num_params()];
        *params.last_mut().unwrap() = 4.0;
        a.critic1 = Mlp::from_params(spec, params).unwrap();
        let (grads, objective) = a.actor_gradient(&batch(false, -1.0)).unwrap();
        assert!(grads.iter().all(|&g| g == 0.0));
        assert_eq!(objective, -4.0);
    }

    #[test]
    fn actor_updates_are_delayed() {
        let mut a = agent(2);
        let cfg = Td3Config::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = batch(false, -1.0);
        assert!(a.update(&b, &cfg, &mut rng).unwrap().pi_loss.is_none());
        assert!(a.update(&b, &cfg, &mut rng).unwrap().pi_loss.is_some());
        assert_eq!(a.critic_updates(), 2);
    }
}
