//! Dense ReLU network with a softmax head.
//!
//! Weights are stored row-major with shape `(out, in)`; a batch is a `(B, in)`
//! matrix and every layer computes `z = a Wᵀ + b`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::loss::soft_ce_loss;
use crate::rng;
use crate::tensor::Tensor;

/// One affine layer. Also used as the gradient/momentum container, since those
/// shape-match the parameters exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    fn zeros_like(&self) -> Dense {
        Dense {
            weight: Tensor::zeros(self.weight.shape()),
            bias: Tensor::zeros(self.bias.shape()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Dense>,
}

/// Per-parameter gradients, shape-matched to an [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradBundle {
    pub layers: Vec<Dense>,
}

impl MlpParams {
    /// Assembles a network from explicit layers, checking that extents chain.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("a network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weight.shape().len() != 2 || l.bias.shape() != [l.outputs()] {
                return Err(Error::shape(format!(
                    "layer {i}: weight {:?} / bias {:?}",
                    l.weight.shape(),
                    l.bias.shape()
                )));
            }
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].outputs() != w[1].inputs() {
                return Err(Error::shape(format!(
                    "layer {i} emits {} but layer {} expects {}",
                    w[0].outputs(),
                    i + 1,
                    w[1].inputs()
                )));
            }
        }
        Ok(MlpParams { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    /// `[in, hidden..., K]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs()];
        sizes.extend(self.layers.iter().map(Dense::outputs));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn classes(&self) -> usize {
        self.layers.last().map(Dense::outputs).unwrap_or(0)
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    pub fn zeros_like(&self) -> GradBundle {
        GradBundle {
            layers: self.layers.iter().map(Dense::zeros_like).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.is_finite())
    }
}

impl GradBundle {
    pub fn matches(&self, params: &MlpParams) -> bool {
        self.layers.len() == params.layers.len()
            && self.layers.iter().zip(&params.layers).all(|(g, p)| {
                g.weight.same_shape(&p.weight) && g.bias.same_shape(&p.bias)
            })
    }
}

/// Draws weights from `U(-1/√fan_in, 1/√fan_in)`; biases start at zero.
pub fn init_params(layer_sizes: &[usize], seed: u64) -> Result<MlpParams> {
    if layer_sizes.len() < 2 {
        return Err(Error::config(format!(
            "layer_sizes needs at least 2 entries, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::config(format!(
            "layer_sizes must be positive, got {layer_sizes:?}"
        )));
    }
    let mut stream = rng::stream(seed, &[rng::tag("init")]);
    let layers = layer_sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| stream.random_range(-scale..scale))
                .collect();
            Dense {
                weight: Tensor::from_vec(&[fan_out, fan_in], data).expect("extents checked"),
                bias: Tensor::zeros(&[fan_out]),
            }
        })
        .collect();
    MlpParams::from_layers(layers)
}

/// In-place numerically stable softmax of one row.
pub(crate) fn softmax_row(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// `out[b, o] = Σ_i a[b, i] · W[o, i] + bias[o]`
fn affine(a: &[f64], batch: usize, layer: &Dense) -> Vec<f64> {
    let (n_in, n_out) = (layer.inputs(), layer.outputs());
    let w = layer.weight.data();
    let bias = layer.bias.data();
    let mut out = vec![0.0; batch * n_out];
    for b in 0..batch {
        let x = &a[b * n_in..(b + 1) * n_in];
        let o = &mut out[b * n_out..(b + 1) * n_out];
        for (j, oj) in o.iter_mut().enumerate() {
            let wj = &w[j * n_in..(j + 1) * n_in];
            *oj = bias[j] + wj.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        }
    }
    out
}

fn check_batch(params: &MlpParams, batch: &Tensor) -> Result<usize> {
    if batch.shape().len() != 2 || batch.cols() != params.input_dim() {
        return Err(Error::shape(format!(
            "batch {:?} does not fit a network with {} inputs",
            batch.shape(),
            params.input_dim()
        )));
    }
    Ok(batch.rows())
}

/// Pre-activations of every layer; the last entry holds the logits.
fn pre_activations(params: &MlpParams, batch: &Tensor) -> Result<Vec<Vec<f64>>> {
    let b = check_batch(params, batch)?;
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(params.layers.len());
    let mut a = batch.data().to_vec();
    for (i, layer) in params.layers.iter().enumerate() {
        let z = affine(&a, b, layer);
        if i + 1 < params.layers.len() {
            a = z.iter().map(|v| v.max(0.0)).collect();
        }
        zs.push(z);
    }
    Ok(zs)
}

/// Class probabilities, one row per sample.
pub fn forward(params: &MlpParams, batch: &Tensor) -> Result<Tensor> {
    let b = check_batch(params, batch)?;
    let k = params.classes();
    if b == 0 {
        return Ok(Tensor::zeros(&[0, k]));
    }
    let mut logits = pre_activations(params, batch)?.pop().expect("non-empty net");
    for row in logits.chunks_exact_mut(k) {
        softmax_row(row);
    }
    Tensor::from_vec(&[b, k], logits)
}

/// Output of the last hidden layer (after the rectifier). For a network with
/// no hidden layers this is the input itself.
pub fn hidden_activations(params: &MlpParams, batch: &Tensor) -> Result<Tensor> {
    let b = check_batch(params, batch)?;
    let mut zs = pre_activations(params, batch)?;
    zs.pop();
    match zs.pop() {
        Some(z) => {
            let width = z.len() / b.max(1);
            Tensor::from_vec(&[b, width], z.into_iter().map(|v| v.max(0.0)).collect())
        }
        None => Ok(batch.clone()),
    }
}

/// Loss and exact gradients of `soft_ce_loss(forward(params, batch), targets)`.
///
/// The logit gradient uses `(p - t) / B`, which holds because each target row
/// sums to one. Probabilities clamped at the log floor are treated as unclamped.
pub fn backward(
    params: &MlpParams,
    batch: &Tensor,
    targets: &Tensor,
) -> Result<(f64, GradBundle)> {
    let b = check_batch(params, batch)?;
    let k = params.classes();
    if targets.shape() != [b, k] {
        return Err(Error::shape(format!(
            "targets {:?} do not match batch of {b} over {k} classes",
            targets.shape()
        )));
    }
    if b == 0 {
        return Err(Error::shape("empty batch"));
    }
    let zs = pre_activations(params, batch)?;
    let mut probs = zs.last().expect("non-empty net").clone();
    for row in probs.chunks_exact_mut(k) {
        softmax_row(row);
    }
    let probs = Tensor::from_vec(&[b, k], probs)?;
    let loss = soft_ce_loss(&probs, targets)?;

    let inv_b = 1.0 / b as f64;
    let mut delta: Vec<f64> = probs
        .data()
        .iter()
        .zip(targets.data())
        .map(|(p, t)| (p - t) * inv_b)
        .collect();

    let mut grads = params.zeros_like();
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let (n_in, n_out) = (layer.inputs(), layer.outputs());
        // Input to layer l.
        let input: Vec<f64> = if l == 0 {
            batch.data().to_vec()
        } else {
            zs[l - 1].iter().map(|v| v.max(0.0)).collect()
        };
        let g = &mut grads.layers[l];
        {
            let gw = g.weight.data_mut();
            for s in 0..b {
                let d = &delta[s * n_out..(s + 1) * n_out];
                let x = &input[s * n_in..(s + 1) * n_in];
                for (j, dj) in d.iter().enumerate() {
                    if *dj == 0.0 {
                        continue;
                    }
                    let row = &mut gw[j * n_in..(j + 1) * n_in];
                    for (w, xi) in row.iter_mut().zip(x) {
                        *w += dj * xi;
                    }
                }
            }
        }
        {
            let gb = g.bias.data_mut();
            for s in 0..b {
                for (j, gbj) in gb.iter_mut().enumerate() {
                    *gbj += delta[s * n_out + j];
                }
            }
        }
        if l > 0 {
            let w = layer.weight.data();
            let z_prev = &zs[l - 1];
            let mut next = vec![0.0; b * n_in];
            for s in 0..b {
                let d = &delta[s * n_out..(s + 1) * n_out];
                let out = &mut next[s * n_in..(s + 1) * n_in];
                for (j, dj) in d.iter().enumerate() {
                    if *dj == 0.0 {
                        continue;
                    }
                    let wj = &w[j * n_in..(j + 1) * n_in];
                    for (o, wij) in out.iter_mut().zip(wj) {
                        *o += dj * wij;
                    }
                }
                for (o, z) in out.iter_mut().zip(&z_prev[s * n_in..(s + 1) * n_in]) {
                    if *z <= 0.0 {
                        *o = 0.0;
                    }
                }
            }
            delta = next;
        }
    }
    Ok((loss, grads))
}
