//! Mini-batch loops shared by every phase.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{backward, init_params, one_hot, MlpParams, OptimState, SgdConfig};
use crate::rng::{self, Stream};
use crate::tensor::Tensor;

/// Plain supervised training schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSpec {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            epochs: 100,
            batch_size: 32,
            lr: 0.05,
            momentum: 0.9,
            weight_decay: 1e-3,
        }
    }
}

impl TrainSpec {
    pub fn sgd(&self) -> SgdConfig {
        SgdConfig {
            lr: self.lr,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        self.sgd().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Descend,
    Ascend,
}

fn ensure_finite(params: &MlpParams, loss: f64, what: &str) -> Result<()> {
    if !loss.is_finite() || !params.is_finite() {
        return Err(Error::Numerical(format!("non-finite value during {what}")));
    }
    Ok(())
}

/// Runs `epochs` shuffled passes over `(x, targets)` with one optimizer state.
/// Returns the mean batch loss of the last pass, or `None` when there is
/// nothing to train on.
pub fn run_epochs(
    params: &mut MlpParams,
    x: &Tensor,
    targets: &Tensor,
    sgd: SgdConfig,
    dir: Direction,
    epochs: usize,
    batch_size: usize,
    stream: &mut Stream,
) -> Result<Option<f64>> {
    let n = x.rows();
    if targets.rows() != n {
        return Err(Error::shape(format!("{n} inputs vs {} targets", targets.rows())));
    }
    if n == 0 || epochs == 0 {
        return Ok(None);
    }
    if batch_size == 0 {
        return Err(Error::config("batch_size must be >= 1"));
    }
    let mut opt = OptimState::new(params, sgd)?;
    let mut order: Vec<usize> = (0..n).collect();
    let mut last = None;
    for _ in 0..epochs {
        order.shuffle(stream);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(batch_size) {
            let xb = x.select_rows(chunk);
            let tb = targets.select_rows(chunk);
            let (loss, grads) = backward(params, &xb, &tb)?;
            match dir {
                Direction::Descend => opt.descend(params, &grads)?,
                Direction::Ascend => opt.ascend(params, &grads)?,
            }
            ensure_finite(params, loss, "training")?;
            total += loss;
            batches += 1;
        }
        last = Some(total / batches as f64);
    }
    Ok(last)
}

fn train_hard(params: &mut MlpParams, data: &Dataset, spec: &TrainSpec, stream: &mut Stream) -> Result<()> {
    let targets = one_hot(data.labels(), data.classes())?;
    run_epochs(
        params,
        data.features(),
        &targets,
        spec.sgd(),
        Direction::Descend,
        spec.epochs,
        spec.batch_size,
        stream,
    )?;
    Ok(())
}

/// Trains a fresh network on clean data with one-hot targets.
///
/// `layer_sizes` must start with the feature width and end with the class
/// count.
pub fn learn_initial(d0: &Dataset, layer_sizes: &[usize], spec: &TrainSpec, seed: u64) -> Result<MlpParams> {
    if d0.is_empty() {
        return Err(Error::config("initial training set is empty"));
    }
    spec.validate()?;
    if layer_sizes.first() != Some(&d0.dims()) || layer_sizes.last() != Some(&d0.classes()) {
        return Err(Error::config(format!(
            "layer sizes {layer_sizes:?} must start at {} inputs and end at {} classes",
            d0.dims(),
            d0.classes()
        )));
    }
    let mut params = init_params(layer_sizes, seed)?;
    let mut stream = rng::stream(seed, &[rng::tag("learn_initial")]);
    train_hard(&mut params, d0, spec, &mut stream)?;
    Ok(params)
}

/// Continues training `theta0` on the observed (possibly noisy) labels.
pub fn learn_incremental(theta0: &MlpParams, du: &Dataset, spec: &TrainSpec, seed: u64) -> Result<MlpParams> {
    if du.classes() != theta0.classes() || du.dims() != theta0.input_dim() {
        return Err(Error::config(format!(
            "dataset ({} dims, {} classes) does not match the model ({} inputs, {} classes)",
            du.dims(),
            du.classes(),
            theta0.input_dim(),
            theta0.classes()
        )));
    }
    spec.validate()?;
    let mut params = theta0.clone();
    let mut stream = rng::stream(seed, &[rng::tag("learn_incremental")]);
    train_hard(&mut params, du, spec, &mut stream)?;
    Ok(params)
}
