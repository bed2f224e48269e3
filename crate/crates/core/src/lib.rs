//! Confidence-oriented learning, unlearning and relearning (COLUR) for
//! restoring classifiers that were degraded by incremental training on
//! noisy-label data.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: a small deterministic MLP stack (forward/backward, soft-target
//!   cross-entropy, SGD descent and raw gradient ascent, checkpoints).
//! - [`data`]: synthetic Gaussian blobs, stratified splits, symmetric and
//!   asymmetric exact-count label noise, CSV I/O.
//! - [`confidence`]: predictions, confidence scores, label smoothing,
//!   teacher/student agreement partitioning, soft-label mixing and Mixup.
//! - [`lur`]: the learning → unlearning → relearning pipeline.
//! - [`eval`]: accuracy, error on the noisy subset, confusion matrices and
//!   report files.
//! - [`bench`]: the end-to-end blobs restoration benchmark.

pub mod bench;
pub mod confidence;
pub mod data;
pub mod error;
pub mod eval;
pub mod lur;
pub mod nn;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
