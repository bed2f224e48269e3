use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::SgdConfig;

/// Which refinement phases run. All on is the full method; all off turns the
/// pipeline into the identity on the student.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Toggles {
    /// Gradient-ascent unlearning of high-confidence disagreements.
    pub unlearn: bool,
    /// Label-smoothed relearning of high-confidence agreements.
    pub smooth: bool,
    /// Mixup relearning of low-confidence samples.
    pub mixup: bool,
}

impl Toggles {
    pub const ALL: Toggles = Toggles {
        unlearn: true,
        smooth: true,
        mixup: true,
    };
    pub const NONE: Toggles = Toggles {
        unlearn: false,
        smooth: false,
        mixup: false,
    };

    /// All eight on/off combinations, full first.
    pub fn all_combinations() -> Vec<Toggles> {
        (0..8u8)
            .rev()
            .map(|m| Toggles {
                unlearn: m & 4 != 0,
                smooth: m & 2 != 0,
                mixup: m & 1 != 0,
            })
            .collect()
    }

    /// `ul+ls+mp`, `ls`, `none`, ...
    pub fn label(&self) -> String {
        let parts: Vec<&str> = [(self.unlearn, "ul"), (self.smooth, "ls"), (self.mixup, "mp")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }

    pub fn parse(s: &str) -> Result<Toggles> {
        let mut t = Toggles::NONE;
        let s = s.trim();
        if s == "none" {
            return Ok(t);
        }
        if s == "full" || s == "all" {
            return Ok(Toggles::ALL);
        }
        for part in s.split('+') {
            match part.trim() {
                "ul" => t.unlearn = true,
                "ls" => t.smooth = true,
                "mp" => t.mixup = true,
                other => return Err(Error::config(format!("unknown toggle `{other}` in `{s}`"))),
            }
        }
        Ok(t)
    }
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles::ALL
    }
}

/// Hyperparameters of the unlearning/relearning loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LurConfig {
    /// Joint-confidence threshold separating high from low confidence.
    pub tau: f64,
    /// Smoothing rate of the unlearning targets.
    pub gamma: f64,
    /// Smoothing rate of the agreement relearning targets.
    pub alpha_ls: f64,
    /// Beta(α, α) parameter for both mixing coefficients.
    pub alpha_mix: f64,
    /// Student learning rate (unlearning and relearning).
    pub lambda_u: f64,
    /// Teacher learning rate.
    pub lambda_t: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub iterations: usize,
    pub epochs_per_phase: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub toggles: Toggles,
    /// Also unlearn the teacher on its side of the disagreements.
    pub teacher_unlearn: bool,
}

impl Default for LurConfig {
    fn default() -> Self {
        LurConfig {
            tau: 0.75,
            gamma: 0.25,
            alpha_ls: 0.25,
            alpha_mix: 0.75,
            lambda_u: 0.02,
            lambda_t: 1e-4,
            momentum: 0.9,
            weight_decay: 1e-3,
            iterations: 10,
            epochs_per_phase: 1,
            batch_size: 32,
            seed: 0,
            toggles: Toggles::ALL,
            teacher_unlearn: false,
        }
    }
}

impl LurConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("tau", self.tau)?;
        unit("gamma", self.gamma)?;
        unit("alpha_ls", self.alpha_ls)?;
        if !(self.alpha_mix > 0.0 && self.alpha_mix.is_finite()) {
            return Err(Error::config(format!("alpha_mix must be positive, got {}", self.alpha_mix)));
        }
        for (name, v) in [("lambda_u", self.lambda_u), ("lambda_t", self.lambda_t)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations must be >= 1"));
        }
        if self.epochs_per_phase == 0 {
            return Err(Error::config("epochs_per_phase must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        self.student_sgd().validate()?;
        Ok(())
    }

    pub fn student_sgd(&self) -> SgdConfig {
        SgdConfig {
            lr: self.lambda_u,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
        }
    }

    pub fn teacher_sgd(&self) -> SgdConfig {
        SgdConfig {
            lr: self.lambda_t,
            ..self.student_sgd()
        }
    }
}
