use rand::seq::index;
use rand::Rng;

use super::RlError;

/// One stored experience. `s` and `s_next` are network inputs (already normalized);
/// `a` is the pre-decoding network action.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: f64,
    pub r: f64,
    pub s_next: Vec<f64>,
    /// True only when the episode ended by solving the QP; step-limit truncation
    /// still bootstraps.
    pub done: bool,
}

/// Ring buffer of transitions with a fixed observation width.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    s: Vec<f64>,
    a: Vec<f64>,
    r: Vec<f64>,
    s_next: Vec<f64>,
    done: Vec<bool>,
    cursor: usize,
    len: usize,
}

/// Column-wise sampled transitions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub obs_dim: usize,
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: Vec<f64>,
    pub s_next: Vec<f64>,
    pub done: Vec<bool>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn s(&self, k: usize) -> &[f64] {
        &self.s[k * self.obs_dim..(k + 1) * self.obs_dim]
    }

    pub fn s_next(&self, k: usize) -> &[f64] {
        &self.s_next[k * self.obs_dim..(k + 1) * self.obs_dim]
    }

    pub fn from_transitions(obs_dim: usize, transitions: &[Transition]) -> Self {
        let mut b = Batch { obs_dim, ..Default::default() };
        for t in transitions {
            b.s.extend_from_slice(&t.s);
            b.a.push(t.a);
            b.r.push(t.r);
            b.s_next.extend_from_slice(&t.s_next);
            b.done.push(t.done);
        }
        b
    }
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize) -> Self {
        Self {
            capacity,
            obs_dim,
            s: Vec::new(),
            a: Vec::new(),
            r: Vec::new(),
            s_next: Vec::new(),
            done: Vec::new(),
            cursor: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// Stores `t`, overwriting the oldest entry when full.
    pub fn push(&mut self, t: &Transition) -> Result<(), RlError> {
        if t.s.len() != self.obs_dim || t.s_next.len() != self.obs_dim {
            return Err(RlError::Shape(format!("observation width {} != {}", t.s.len(), self.obs_dim)));
        }
        if !(t.a.is_finite() && t.r.is_finite()) || t.s.iter().chain(&t.s_next).any(|v| !v.is_finite()) {
            return Err(RlError::NonFinite);
        }
        let d = self.obs_dim;
        if self.len < self.capacity {
            self.s.extend_from_slice(&t.s);
            self.a.push(t.a);
            self.r.push(t.r);
            self.s_next.extend_from_slice(&t.s_next);
            self.done.push(t.done);
            self.len += 1;
        } else {
            let k = self.cursor;
            self.s[k * d..(k + 1) * d].copy_from_slice(&t.s);
            self.a[k] = t.a;
            self.r[k] = t.r;
            self.s_next[k * d..(k + 1) * d].copy_from_slice(&t.s_next);
            self.done[k] = t.done;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn get(&self, k: usize) -> Option<Transition> {
        (k < self.len).then(|| {
            let d = self.obs_dim;
            Transition {
                s: self.s[k * d..(k + 1) * d].to_vec(),
                a: self.a[k],
                r: self.r[k],
                s_next: self.s_next[k * d..(k + 1) * d].to_vec(),
                done: self.done[k],
            }
        })
    }

    /// `batch_size` distinct transitions, uniformly at random.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Batch, RlError> {
        if self.len < batch_size {
            return Err(RlError::InsufficientData { have: self.len, need: batch_size });
        }
        let d = self.obs_dim;
        let mut b = Batch { obs_dim: d, ..Default::default() };
        for k in index::sample(rng, self.len, batch_size) {
            b.s.extend_from_slice(&self.s[k * d..(k + 1) * d]);
            b.a.push(self.a[k]);
            b.r.push(self.r[k]);
            b.s_next.extend_from_slice(&self.s_next[k * d..(k + 1) * d]);
            b.done.push(self.done[k]);
        }
        Ok(b)
    }
}
