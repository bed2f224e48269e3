//! End-to-end restoration benchmark on Gaussian blobs: train on clean data,
//! degrade on noisy data, restore, and score every stage on a held-out test
//! set.

use serde::{Deserialize, Serialize};

use crate::data::{inject, make_blobs, split, Dataset, NoiseSpec, NoisyDataset};
use crate::error::{Error, Result};
use crate::eval::{accuracy, noisy_subset_error};
use crate::lur::{learn_incremental, learn_initial, Colur, LurConfig, PhaseTrace, Toggles, TrainSpec};
use crate::nn::MlpParams;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobsSpec {
    pub classes: usize,
    pub per_class: usize,
    pub dims: usize,
    pub spread: f64,
    /// Test samples per class, drawn from the same clusters.
    pub test_per_class: usize,
}

impl Default for BlobsSpec {
    fn default() -> Self {
        BlobsSpec {
            classes: 4,
            per_class: 250,
            dims: 2,
            spread: 1.0,
            test_per_class: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub blobs: BlobsSpec,
    /// Fraction of each class used for initial training.
    pub split_ratio: f64,
    pub noise: NoiseSpec,
    pub hidden: Vec<usize>,
    pub initial: TrainSpec,
    pub degrade: TrainSpec,
    pub lur: LurConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            blobs: BlobsSpec::default(),
            split_ratio: 0.4,
            noise: NoiseSpec::symmetric(0.5),
            hidden: vec![64, 64],
            initial: TrainSpec {
                epochs: 30,
                batch_size: 32,
                lr: 0.02,
                momentum: 0.9,
                weight_decay: 1e-3,
            },
            degrade: TrainSpec {
                epochs: 600,
                batch_size: 16,
                lr: 0.02,
                momentum: 0.9,
                weight_decay: 0.0,
            },
            lur: LurConfig::default(),
        }
    }
}

impl BenchmarkConfig {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.blobs.dims];
        s.extend(&self.hidden);
        s.push(self.blobs.classes);
        s
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.noise.ratio = eta;
        self
    }
}

/// Per-purpose seeds derived from one experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub data: u64,
    pub test: u64,
    pub split: u64,
    pub noise: u64,
    pub initial: u64,
    pub degrade: u64,
    pub lur: u64,
}

impl Seeds {
    pub fn from(seed: u64) -> Self {
        let d = |t: &str| rng::derive_seed(seed, &[rng::tag(t)]);
        Seeds {
            data: d("data"),
            test: d("test"),
            split: d("split"),
            noise: d("noise"),
            initial: d("initial"),
            degrade: d("degrade"),
            lur: d("lur"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub d0: Dataset,
    pub du: NoisyDataset,
    pub test: Dataset,
}

pub fn prepare(cfg: &BenchmarkConfig, seed: u64) -> Result<Prepared> {
    let s = Seeds::from(seed);
    let b = &cfg.blobs;
    let all = make_blobs(b.classes, b.per_class, b.dims, b.spread, s.data)?;
    if b.test_per_class == 0 {
        return Err(Error::config("test_per_class must be >= 1"));
    }
    let test = make_blobs(b.classes, b.test_per_class, b.dims, b.spread, s.test)?;
    let (d0, du) = split(&all, cfg.split_ratio, s.split)?;
    let du = inject(&du, &cfg.noise, s.noise)?;
    Ok(Prepared { d0, du, test })
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub theta0: MlpParams,
    pub theta_u: MlpParams,
}

pub fn train_and_degrade(cfg: &BenchmarkConfig, data: &Prepared, seed: u64) -> Result<Trained> {
    let s = Seeds::from(seed);
    let theta0 = learn_initial(&data.d0, &cfg.layer_sizes(), &cfg.initial, s.initial)?;
    let theta_u = learn_incremental(&theta0, data.du.observed(), &cfg.degrade, s.degrade)?;
    Ok(Trained { theta0, theta_u })
}

/// Scores of one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub accuracy: f64,
    /// Error on the corrupted training samples, `None` without noise.
    pub noisy_subset_error: Option<f64>,
}

pub fn score(params: &MlpParams, data: &Prepared) -> Result<Score> {
    Ok(Score {
        accuracy: accuracy(params, &data.test)?,
        noisy_subset_error: if data.du.noisy_count() > 0 {
            Some(noisy_subset_error(params, &data.du)?)
        } else {
            None
        },
    })
}

#[derive(Debug, Clone)]
pub struct Restored {
    pub toggles: Toggles,
    pub student: MlpParams,
    pub trace: PhaseTrace,
    pub score: Score,
}

pub fn restore(cfg: &BenchmarkConfig, data: &Prepared, trained: &Trained, toggles: Toggles, seed: u64) -> Result<Restored> {
    let lur = LurConfig {
        toggles,
        seed: Seeds::from(seed).lur,
        ..cfg.lur.clone()
    };
    let out = Colur::new(lur).run(&trained.theta_u, &trained.theta0, data.du.observed())?;
    Ok(Restored {
        toggles,
        score: score(&out.student, data)?,
        student: out.student,
        trace: out.trace,
    })
}

/// Original, degraded and restored scores for one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub seed: u64,
    pub original: Score,
    pub degrade: Score,
    pub restored: Vec<(String, Score)>,
}

impl BenchOutcome {
    pub fn restored(&self, t: Toggles) -> Option<Score> {
        let label = t.label();
        self.restored.iter().find(|(l, _)| *l == label).map(|(_, s)| *s)
    }
}

pub fn run_benchmark(cfg: &BenchmarkConfig, seed: u64, toggle_sets: &[Toggles]) -> Result<BenchOutcome> {
    let data = prepare(cfg, seed)?;
    let trained = train_and_degrade(cfg, &data, seed)?;
    let restored = toggle_sets
        .iter()
        .map(|&t| restore(cfg, &data, &trained, t, seed).map(|r| (t.label(), r.score)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchOutcome {
        seed,
        original: score(&trained.theta0, &data)?,
        degrade: score(&trained.theta_u, &data)?,
        restored,
    })
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}
