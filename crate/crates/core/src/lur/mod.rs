//! Learning, unlearning and relearning.
//!
//! [`learn_initial`] and [`learn_incremental`] produce the original and the
//! degraded model. [`Colur`] then alternates, for a fixed number of
//! iterations:
//!
//! 1. predict with teacher and student and partition the samples into
//!    high/low-confidence agreements and disagreements;
//! 2. (UL) gradient ascent on the student's high-confidence disagreements
//!    against label-smoothed targets, then re-predict and re-partition;
//! 3. (MP) mixup relearning of the low-confidence samples, paired with
//!    high-confidence agreements;
//! 4. (LS) label-smoothed relearning of the high-confidence agreements.

mod config;
mod pipeline;
mod steps;
mod trace;
mod train;

pub use config::{LurConfig, Toggles};
pub use pipeline::{run_colur, Colur, ColurOutput};
pub use steps::{build_mixup_set, relearn_agreement_step, relearn_mixup_step, unlearn_step, MixupSet, RelearnLoss};
pub use trace::{Phase, PhaseTrace, TraceRow, TRACE_CSV_HEADER};
pub use train::{learn_incremental, learn_initial, run_epochs, Direction, TrainSpec};
