//! Deterministic differentiable stack: dense MLP, soft-target cross-entropy,
//! SGD descent/ascent and checkpoints.

pub mod checkpoint;
pub mod loss;
pub mod mlp;
pub mod optim;

pub use loss::{one_hot, soft_ce_loss, LOG_FLOOR};
pub use mlp::{backward, forward, hidden_activations, init_params, Dense, GradBundle, MlpParams};
pub use optim::{ascend, descend, OptimState, SgdConfig};
