use serde::{Deserialize, Serialize};

use crate::data::NoisyDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    /// Samples whose true label is this class.
    pub original: usize,
    /// Corrupted samples now labelled as this class.
    pub noisy: usize,
    /// Uncorrupted samples labelled as this class.
    pub clean: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    pub per_class: Vec<ClassCounts>,
    pub noisy_mean: f64,
    /// Population standard deviation of the per-class noisy counts.
    pub noisy_std: f64,
    pub clean_mean: f64,
}

pub fn noise_stats(nd: &NoisyDataset) -> NoiseStats {
    let k = nd.base.classes();
    let mut per_class = vec![ClassCounts { original: 0, noisy: 0, clean: 0 }; k];
    for ((&obs, &truth), &flag) in nd.base.labels().iter().zip(&nd.true_labels).zip(&nd.noise_flags) {
        per_class[truth].original += 1;
        if flag {
            per_class[obs].noisy += 1;
        } else {
            per_class[obs].clean += 1;
        }
    }
    let mean = |f: fn(&ClassCounts) -> usize| per_class.iter().map(|c| f(c) as f64).sum::<f64>() / k as f64;
    let noisy_mean = mean(|c| c.noisy);
    let clean_mean = mean(|c| c.clean);
    let noisy_std = (per_class
        .iter()
        .map(|c| (c.noisy as f64 - noisy_mean).powi(2))
        .sum::<f64>()
        / k as f64)
        .sqrt();
    NoiseStats {
        per_class,
        noisy_mean,
        noisy_std,
        clean_mean,
    }
}
