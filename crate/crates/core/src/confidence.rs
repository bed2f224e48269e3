//! Predictions, confidence scores, label smoothing, teacher/student
//! agreement partitioning and the soft-label mixing primitives.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{forward, MlpParams};
use crate::tensor::Tensor;

/// Class probabilities for one sample with its argmax label and confidence
/// `max(probs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probs: Vec<f64>,
    pub label: usize,
    pub confidence: f64,
}

impl Prediction {
    /// Ties resolve to the lowest class index.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let (label, confidence) = argmax(&probs);
        Prediction {
            probs,
            label,
            confidence,
        }
    }
}

pub(crate) fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best })
}

pub fn predict(params: &MlpParams, x: &Tensor) -> Result<Vec<Prediction>> {
    let probs = forward(params, x)?;
    Ok(probs.row_iter().take(x.rows()).map(|r| Prediction::from_probs(r.to_vec())).collect())
}

/// `(1 − γ)·onehot(y) + γ/K`.
pub fn smooth_label(y: usize, gamma: f64, classes: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::config(format!("smoothing rate must lie in [0, 1], got {gamma}")));
    }
    if y >= classes {
        return Err(Error::config(format!("label {y} out of range for {classes} classes")));
    }
    let mut v = vec![gamma / classes as f64; classes];
    v[y] += 1.0 - gamma;
    Ok(v)
}

/// Geometric mean of two confidences.
pub fn joint_confidence(c_a: f64, c_b: f64) -> f64 {
    (c_a * c_b).sqrt()
}

/// Teacher/student agreement structure over the same samples.
///
/// `disagree`/`agree` split all indices by whether the two argmax labels
/// differ; each side is then split at `joint_conf >= tau`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PartitionSets {
    pub tau: f64,
    pub disagree: Vec<usize>,
    pub agree: Vec<usize>,
    pub joint_conf: Vec<f64>,
    pub high_disagree: Vec<usize>,
    pub low_disagree: Vec<usize>,
    pub high_agree: Vec<usize>,
    pub low_agree: Vec<usize>,
}

impl PartitionSets {
    pub fn len(&self) -> usize {
        self.joint_conf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joint_conf.is_empty()
    }

    /// Low-confidence disagreements followed by low-confidence agreements.
    pub fn low(&self) -> Vec<usize> {
        let mut v = self.low_disagree.clone();
        v.extend_from_slice(&self.low_agree);
        v.sort_unstable();
        v
    }

    pub fn mean_joint_confidence(&self) -> f64 {
        if self.joint_conf.is_empty() {
            0.0
        } else {
            self.joint_conf.iter().sum::<f64>() / self.joint_conf.len() as f64
        }
    }

    /// `[|S_τ|, |S_<τ|, |A_τ|, |A_<τ|]`
    pub fn sizes(&self) -> [usize; 4] {
        [
            self.high_disagree.len(),
            self.low_disagree.len(),
            self.high_agree.len(),
            self.low_agree.len(),
        ]
    }
}

pub fn partition(preds_t: &[Prediction], preds_u: &[Prediction], tau: f64) -> Result<PartitionSets> {
    if preds_t.len() != preds_u.len() {
        return Err(Error::shape(format!(
            "{} teacher predictions vs {} student predictions",
            preds_t.len(),
            preds_u.len()
        )));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::config(format!("threshold must lie in [0, 1], got {tau}")));
    }
    let mut sets = PartitionSets {
        tau,
        ..PartitionSets::default()
    };
    for (i, (t, u)) in preds_t.iter().zip(preds_u).enumerate() {
        let jc = joint_confidence(t.confidence, u.confidence);
        sets.joint_conf.push(jc);
        let high = jc >= tau;
        if t.label != u.label {
            sets.disagree.push(i);
            if high { &mut sets.high_disagree } else { &mut sets.low_disagree }.push(i);
        } else {
            sets.agree.push(i);
            if high { &mut sets.high_agree } else { &mut sets.low_agree }.push(i);
        }
    }
    Ok(sets)
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(format!("length {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

fn lerp(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| w * x + (1.0 - w) * y).collect()
}

/// `β_m·p_t + (1 − β_m)·p_u`.
pub fn mix_soft_labels(p_t: &[f64], p_u: &[f64], beta_m: f64) -> Result<Vec<f64>> {
    check_len(p_t, p_u)?;
    check_weight(beta_m)?;
    Ok(lerp(p_t, p_u, beta_m))
}

/// Elementwise mean of two probability vectors.
pub fn avg_soft_labels(p_t: &[f64], p_u: &[f64]) -> Result<Vec<f64>> {
    check_len(p_t, p_u)?;
    Ok(p_t.iter().zip(p_u).map(|(a, b)| (a + b) / 2.0).collect())
}

/// Convex interpolation of two samples and their soft labels with the same
/// weight.
pub fn mixup(x1: &[f64], p1: &[f64], x2: &[f64], p2: &[f64], beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(x1, x2)?;
    check_len(p1, p2)?;
    check_weight(beta)?;
    Ok((lerp(x1, x2, beta), lerp(p1, p2, beta)))
}

fn check_weight(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::config(format!("mixing weight must lie in [0, 1], got {w}")));
    }
    Ok(())
}

/// Gamma(shape, 1) by Marsaglia–Tsang, with the `U^{1/a}` boost for shape < 1.
fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.random();
        return sample_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        if u < 1.0 - 0.0331 * z.powi(4) || u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// One Beta(α, α) variate as `X / (X + Y)` with `X, Y ~ Gamma(α)`.
pub fn sample_beta<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::config(format!("Beta parameter must be positive, got {alpha}")));
    }
    loop {
        let x = sample_gamma(alpha, rng);
        let y = sample_gamma(alpha, rng);
        let s = x + y;
        // Both draws can underflow to zero for tiny α.
        if s > 0.0 {
            return Ok((x / s).clamp(0.0, 1.0));
        }
    }
}
