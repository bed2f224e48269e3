//! The three refinement phases. Each starts a fresh optimizer state, so
//! momentum never carries across a phase boundary.

use log::warn;
use rand::Rng;

use crate::confidence::{avg_soft_labels, mix_soft_labels, mixup, sample_beta, smooth_label, Prediction};
use crate::error::{Error, Result};
use crate::lur::train::{run_epochs, Direction};
use crate::lur::LurConfig;
use crate::nn::{MlpParams, SgdConfig};
use crate::rng::Stream;
use crate::tensor::Tensor;

fn smoothed_targets(labels: &[usize], rate: f64, classes: usize) -> Result<Tensor> {
    let mut data = Vec::with_capacity(labels.len() * classes);
    for &y in labels {
        data.extend(smooth_label(y, rate, classes)?);
    }
    if labels.is_empty() {
        return Ok(Tensor::zeros(&[0, classes]));
    }
    Tensor::from_vec(&[labels.len(), classes], data)
}

/// Gradient ascent on `x` against `LS(labels; γ)` at learning rate `lr`.
/// Empty input is a no-op. Returns the mean loss of the last pass.
pub fn unlearn_step(
    model: &mut MlpParams,
    x: &Tensor,
    labels: &[usize],
    lr: f64,
    cfg: &LurConfig,
    stream: &mut Stream,
) -> Result<Option<f64>> {
    if x.rows() != labels.len() {
        return Err(Error::shape(format!("{} samples vs {} labels", x.rows(), labels.len())));
    }
    let targets = smoothed_targets(labels, cfg.gamma, model.classes())?;
    let sgd = SgdConfig {
        lr,
        momentum: 0.0,
        weight_decay: 0.0,
    };
    run_epochs(model, x, &targets, sgd, Direction::Ascend, cfg.epochs_per_phase, cfg.batch_size, stream)
}

/// Mixed inputs and soft targets for the low-confidence relearning phase.
#[derive(Debug, Clone, PartialEq)]
pub struct MixupSet {
    pub x: Tensor,
    pub targets: Tensor,
}

impl MixupSet {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

/// For every low-confidence sample: blend the two models' probabilities with
/// `β_m ~ Beta(α, α)`, pair it with a uniformly drawn high-confidence
/// agreement whose target is the mean of both models' probabilities, and mix
/// the pair with a fresh `β ~ Beta(α, α)`.
pub fn build_mixup_set(
    x: &Tensor,
    low: &[usize],
    high_agree: &[usize],
    preds_t: &[Prediction],
    preds_u: &[Prediction],
    alpha_mix: f64,
    stream: &mut Stream,
) -> Result<MixupSet> {
    let k = preds_t.first().map(|p| p.probs.len()).unwrap_or(0);
    let d = x.cols();
    if low.is_empty() || high_agree.is_empty() {
        return Ok(MixupSet {
            x: Tensor::zeros(&[0, d]),
            targets: Tensor::zeros(&[0, k]),
        });
    }
    let mut xs = Vec::with_capacity(low.len() * d);
    let mut ps = Vec::with_capacity(low.len() * k);
    for &i in low {
        let beta_m = sample_beta(alpha_mix, stream)?;
        let p_low = mix_soft_labels(&preds_t[i].probs, &preds_u[i].probs, beta_m)?;
        let j = high_agree[stream.random_range(0..high_agree.len())];
        let p_high = avg_soft_labels(&preds_t[j].probs, &preds_u[j].probs)?;
        let beta = sample_beta(alpha_mix, stream)?;
        let (xm, pm) = mixup(x.row(i), &p_low, x.row(j), &p_high, beta)?;
        xs.extend(xm);
        ps.extend(pm);
    }
    Ok(MixupSet {
        x: Tensor::from_vec(&[low.len(), d], xs)?,
        targets: Tensor::from_vec(&[low.len(), k], ps)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelearnLoss {
    pub student: Option<f64>,
    pub teacher: Option<f64>,
}

fn descend_both(
    student: &mut MlpParams,
    teacher: &mut MlpParams,
    x: &Tensor,
    targets: &Tensor,
    cfg: &LurConfig,
    stream: &mut Stream,
) -> Result<RelearnLoss> {
    let student_loss = run_epochs(
        student,
        x,
        targets,
        cfg.student_sgd(),
        Direction::Descend,
        cfg.epochs_per_phase,
        cfg.batch_size,
        stream,
    )?;
    let teacher_loss = if cfg.lambda_t > 0.0 {
        run_epochs(
            teacher,
            x,
            targets,
            cfg.teacher_sgd(),
            Direction::Descend,
            cfg.epochs_per_phase,
            cfg.batch_size,
            stream,
        )?
    } else {
        None
    };
    Ok(RelearnLoss {
        student: student_loss,
        teacher: teacher_loss,
    })
}

/// Relearns both models on a mixup set built from the low-confidence samples.
/// Skips (with a warning) when there are low-confidence samples but no
/// high-confidence agreements to pair them with.
#[allow(clippy::too_many_arguments)]
pub fn relearn_mixup_step(
    student: &mut MlpParams,
    teacher: &mut MlpParams,
    x: &Tensor,
    low: &[usize],
    high_agree: &[usize],
    preds_t: &[Prediction],
    preds_u: &[Prediction],
    cfg: &LurConfig,
    stream: &mut Stream,
) -> Result<RelearnLoss> {
    if !low.is_empty() && high_agree.is_empty() {
        warn!("{} low-confidence samples but no high-confidence agreements; skipping mixup relearning", low.len());
        return Ok(RelearnLoss::default());
    }
    let set = build_mixup_set(x, low, high_agree, preds_t, preds_u, cfg.alpha_mix, stream)?;
    if set.is_empty() {
        return Ok(RelearnLoss::default());
    }
    descend_both(student, teacher, &set.x, &set.targets, cfg, stream)
}

/// Relearns both models on high-confidence agreements with `LS(y; α_ls)`.
pub fn relearn_agreement_step(
    student: &mut MlpParams,
    teacher: &mut MlpParams,
    x: &Tensor,
    labels: &[usize],
    cfg: &LurConfig,
    stream: &mut Stream,
) -> Result<RelearnLoss> {
    if x.rows() != labels.len() {
        return Err(Error::shape(format!("{} samples vs {} labels", x.rows(), labels.len())));
    }
    if labels.is_empty() {
        return Ok(RelearnLoss::default());
    }
    let targets = smoothed_targets(labels, cfg.alpha_ls, student.classes())?;
    descend_both(student, teacher, x, &targets, cfg, stream)
}
