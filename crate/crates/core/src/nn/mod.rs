//! Small dense MLPs with reverse-mode gradients, Adam and a binary weight format.
//!
//! Parameters live in one flat buffer laid out layer by layer, weights row-major
//! (`fan_out × fan_in`) followed by biases. Gradients, Adam moments and the weight file
//! all share that layout.

mod io;
mod mlp;
mod optim;

pub use io::{load_weights, read_weights, save_weights, write_weights, MAGIC};
pub use mlp::{Activation, Mlp, MlpSpec, Tape};
pub use optim::{adam_step, polyak_update, AdamState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite input to the network")]
    NonFinite,
    #[error("malformed weight file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
