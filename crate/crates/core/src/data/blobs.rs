use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor;

/// Distance between neighbouring cluster centres, in units of `spread`.
pub const CENTER_SEPARATION: f64 = 6.0;

/// Cluster centres on a circle in the first two coordinates. All centres have
/// the same norm, so nearest-centre assignment is linear.
pub fn blob_centers(classes: usize, dims: usize, spread: f64) -> Vec<Vec<f64>> {
    let step = std::f64::consts::TAU / classes as f64;
    let radius = CENTER_SEPARATION * spread / (2.0 * (step / 2.0).sin());
    (0..classes)
        .map(|c| {
            let mut v = vec![0.0; dims];
            let a = step * c as f64;
            v[0] = radius * a.cos();
            v[1] = radius * a.sin();
            v
        })
        .collect()
}

/// `classes` isotropic Gaussian clusters with `per_class` samples each,
/// laid out class by class. Centres depend only on `(classes, dims, spread)`,
/// so different seeds sample the same distribution.
pub fn make_blobs(
    classes: usize,
    per_class: usize,
    dims: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes < 2 || per_class < 1 || dims < 2 {
        return Err(Error::config(format!(
            "blobs need classes >= 2, per_class >= 1, dims >= 2 (got {classes}, {per_class}, {dims})"
        )));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::config(format!("spread must be positive, got {spread}")));
    }
    let centers = blob_centers(classes, dims, spread);
    let mut stream = rng::stream(seed, &[rng::tag("blobs")]);
    let mut data = Vec::with_capacity(classes * per_class * dims);
    let mut labels = Vec::with_capacity(classes * per_class);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for mu in center {
                let z: f64 = StandardNormal.sample(&mut stream);
                data.push(mu + spread * z);
            }
            labels.push(c);
        }
    }
    Dataset::new(Tensor::from_vec(&[classes * per_class, dims], data)?, labels, classes)
}
