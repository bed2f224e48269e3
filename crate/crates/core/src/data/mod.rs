//! Synthetic datasets, stratified splitting, label-noise injection and noise
//! statistics.

mod blobs;
mod dataset;
pub mod io;
mod noise;
mod split;
mod stats;

pub use blobs::{blob_centers, make_blobs, CENTER_SEPARATION};
pub use dataset::{Dataset, NoiseKind, NoiseSpec, NoisyDataset};
pub use noise::{corruption_count, inject, inject_asymmetric, inject_symmetric};
pub use split::split;
pub use stats::{noise_stats, ClassCounts, NoiseStats};

/// `⌊ratio·n⌋`, tolerant of products like `0.29 · 100 = 28.999999999999996`.
pub fn floor_fraction(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}
