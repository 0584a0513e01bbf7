mod common;

use rlqp::nn::{Activation, Mlp, MlpSpec};
use rlqp::rl::{Batch, Td3Agent, Td3Config, Transition};

fn tiny(input_width: usize, hidden: usize, head: Activation, params: Vec<f64>) -> Mlp<f64> {
    let spec = MlpSpec {
        input_width,
        hidden: vec![hidden],
        output_width: 1,
        hidden_activation: Activation::Relu,
        output_activation: head,
    };
    Mlp::from_params(spec, params).unwrap()
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// Actor `tanh(u·relu(v·s₀ + c) + b)` on a 2-wide observation (second input ignored).
fn actor(v: f64, c: f64, u: f64, b: f64) -> Mlp<f64> {
    tiny(2, 1, Activation::Tanh, vec![v, 0.0, c, u, b])
}

/// Critic `k·relu(w_s·s₀ + w_a·a + c) + d` on (s₀, s₁, a).
fn critic(w_s: f64, w_a: f64, c: f64, k: f64, d: f64) -> Mlp<f64> {
    tiny(3, 1, Activation::Identity, vec![w_s, 0.0, w_a, c, k, d])
}

#[test]
fn single_transition_target_by_hand() {
    let (av, ac, au, ab) = (0.8, 0.3, 1.2, -0.1);
    let c1 = (0.5, 1.5, 0.2, 2.0, -0.7);
    let c2 = (-0.4, 0.9, 0.6, 1.5, -0.2);
    let actor_net = actor(av, ac, au, ab);
    let mut agent = Td3Agent::from_networks(
        actor_net.clone(),
        critic(c1.0, c1.1, c1.2, c1.3, c1.4),
        critic(c2.0, c2.1, c2.2, c2.3, c2.4),
        1e-3,
    )
    .unwrap();
    // Online networks differ from targets; only the targets may matter.
    agent.actor = actor(-5.0, 0.0, 0.0, 0.0);
    agent.critic1 = critic(9.0, 9.0, 9.0, 9.0, 9.0);

    let s_next = [0.4, -3.0];
    let (r, gamma, noise) = (-1.0, 0.99, 0.05);
    let a = (au * relu(av * s_next[0] + ac) + ab).tanh() + noise;
    let q = |(ws, wa, c, k, d): (f64, f64, f64, f64, f64)| k * relu(ws * s_next[0] + wa * a + c) + d;
    let expected = r + gamma * q(c1).min(q(c2));
    let got = agent.target_value(r, &s_next, false, gamma, noise).unwrap();
    assert!((got - expected).abs() <= 1e-10, "{got} vs {expected}");
    assert_eq!(agent.target_value(r, &s_next, true, gamma, noise).unwrap(), r);

    // Smoothed action is clamped to the action range before the critics see it.
    let big = agent.target_value(0.0, &s_next, false, 1.0, 10.0).unwrap();
    let qa = |(ws, wa, c, k, d): (f64, f64, f64, f64, f64)| k * relu(ws * s_next[0] + wa + c) + d;
    assert!((big - qa(c1).min(qa(c2))).abs() <= 1e-10);
}

#[test]
fn actor_gradient_closed_form_for_action_affine_critic() {
    // With the critic's hidden unit always active, Q = k(w_s s₀ + w_a a + c) + d and
    // ∂Q/∂a = k·w_a everywhere on [-1, 1].
    let (k, w_a) = (-1.7, 0.6);
    let (v, c, u, b) = (0.9, 2.0, 0.7, 0.2);
    let agent = Td3Agent::from_networks(
        actor(v, c, u, b),
        critic(0.3, w_a, 5.0, k, 0.4),
        critic(0.0, 1.0, 5.0, 1.0, 0.0),
        1e-3,
    )
    .unwrap();
    let states = [[0.5, 1.0], [-1.0, 0.0], [1.5, -2.0], [0.0, 0.3]];
    let transitions: Vec<Transition> = states
        .iter()
        .map(|s| Transition { s: s.to_vec(), a: 0.0, r: 0.0, s_next: s.to_vec(), done: false })
        .collect();
    let batch = Batch::from_transitions(2, &transitions);
    let (grads, objective) = agent.actor_gradient(&batch).unwrap();

    let nb = states.len() as f64;
    let dq = k * w_a;
    let mut want = [0.0; 5];
    let mut obj = 0.0;
    for s in &states {
        let g = relu(v * s[0] + c);
        let a = (u * g + b).tanh();
        let sech2 = 1.0 - a * a;
        obj -= (k * (0.3 * s[0] + w_a * a + 5.0) + 0.4) / nb;
        let active = if v * s[0] + c > 0.0 { 1.0 } else { 0.0 };
        want[0] -= dq * sech2 * u * active * s[0] / nb;
        want[1] -= dq * sech2 * u * active * s[1] / nb;
        want[2] -= dq * sech2 * u * active / nb;
        want[3] -= dq * sech2 * g / nb;
        want[4] -= dq * sech2 / nb;
    }
    for (g, w) in grads.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-8, "{grads:?} vs {want:?}");
    }
    assert!((objective - obj).abs() <= 1e-12);
}

#[test]
fn actor_gradient_matches_finite_differences() {
    let mut rng = common::rng(4);
    let agent = Td3Agent::new(6, 1e-3, &mut rng).unwrap();
    let transitions: Vec<Transition> = (0..8)
        .map(|i| {
            let s: Vec<f64> = (0..6).map(|j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5).collect();
            Transition { s: s.clone(), a: 0.0, r: 0.0, s_next: s, done: false }
        })
        .collect();
    let batch = Batch::from_transitions(6, &transitions);
    let (grads, _) = agent.actor_gradient(&batch).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for p in (0..agent.actor.num_params()).step_by(37) {
        let mut up = agent.clone();
        up.actor.params_mut()[p] += h;
        let mut down = agent.clone();
        down.actor.params_mut()[p] -= h;
        let numeric = (up.actor_gradient(&batch).unwrap().1 - down.actor_gradient(&batch).unwrap().1) / (2.0 * h);
        worst = worst.max((numeric - grads[p]).abs() / numeric.abs().max(grads[p].abs()).max(1e-6));
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn actor_step_moves_targets_by_polyak() {
    let mut rng = common::rng(8);
    let mut agent = Td3Agent::new(2, 1e-3, &mut rng).unwrap();
    agent.critic1 = Mlp::init(MlpSpec::critic(3), &mut rng).unwrap();
    let before_target = agent.critic1_target.clone();
    let t = Transition { s: vec![0.1, 0.2], a: 0.3, r: -1.0, s_next: vec![0.0, 0.1], done: false };
    let batch = Batch::from_transitions(2, &[t]);
    agent.actor_step(&batch, 0.9).unwrap();
    for ((nt, bt), o) in agent.critic1_target.params().iter().zip(before_target.params()).zip(agent.critic1.params()) {
        assert!((nt - (0.9 * bt + 0.1 * o)).abs() <= 1e-15);
    }
}

#[test]
fn critic_step_reduces_loss_on_fixed_targets() {
    let mut rng = common::rng(3);
    let mut agent = Td3Agent::new(2, 1e-2, &mut rng).unwrap();
    let ts: Vec<Transition> = (0..16)
        .map(|i| {
            let x = i as f64 / 16.0;
            Transition { s: vec![x, -x], a: x - 0.5, r: -1.0, s_next: vec![x, x], done: i % 2 == 0 }
        })
        .collect();
    let batch = Batch::from_transitions(2, &ts);
    let targets: Vec<f64> = (0..16).map(|i| -(i as f64) / 8.0).collect();
    let (first, _) = agent.critic_step(&batch, &targets).unwrap();
    let mut last = first;
    for _ in 0..200 {
        last = agent.critic_step(&batch, &targets).unwrap().0;
    }
    assert!(last < 0.1 * first, "{first} -> {last}");
    assert_eq!(agent.critic_updates(), 0);
    let cfg = Td3Config::desk();
    assert!(cfg.validate().is_ok());
}
