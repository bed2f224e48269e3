//! Exact-count label corruption.

use rand::seq::index;
use rand::Rng;

use crate::data::{floor_fraction, Dataset, NoiseKind, NoiseSpec, NoisyDataset};
use crate::error::{Error, Result};
use crate::rng;

/// Number of labels corrupted at ratio `eta`: `⌊η·N⌋`.
pub fn corruption_count(eta: f64, n: usize) -> usize {
    floor_fraction(eta, n)
}

/// Corrupts exactly `⌊η·N⌋` labels, each to a different class drawn uniformly
/// from the allowed alternatives.
pub fn inject(du: &Dataset, spec: &NoiseSpec, seed: u64) -> Result<NoisyDataset> {
    let owner = spec.validate(du.classes())?;
    let k = du.classes();
    let n = du.len();
    let count = corruption_count(spec.ratio, n);
    let mut stream = rng::stream(seed, &[rng::tag("noise")]);
    let mut chosen = index::sample(&mut stream, n, count).into_vec();
    chosen.sort_unstable();

    let groups = spec.superclass_map.as_deref();
    let mut labels = du.labels().to_vec();
    for i in chosen {
        let y = labels[i];
        labels[i] = match (spec.kind, groups, owner.as_ref()) {
            (NoiseKind::Asymmetric, Some(groups), Some(owner)) => {
                let group = &groups[owner[y]];
                let pos = group.iter().position(|&c| c == y).expect("class in own group");
                let r = stream.random_range(0..group.len() - 1);
                group[if r < pos { r } else { r + 1 }]
            }
            _ => {
                let r = stream.random_range(0..k - 1);
                if r < y {
                    r
                } else {
                    r + 1
                }
            }
        };
    }
    NoisyDataset::new(du.relabel(labels)?, du.labels().to_vec(), spec.clone())
}

pub fn inject_symmetric(du: &Dataset, eta: f64, seed: u64) -> Result<NoisyDataset> {
    if du.classes() < 2 {
        return Err(Error::config("symmetric noise needs at least 2 classes"));
    }
    inject(du, &NoiseSpec::symmetric(eta), seed)
}

pub fn inject_asymmetric(
    du: &Dataset,
    eta: f64,
    superclass_map: &[Vec<usize>],
    seed: u64,
) -> Result<NoisyDataset> {
    inject(du, &NoiseSpec::asymmetric(eta, superclass_map.to_vec()), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_blobs;

    fn du() -> Dataset {
        make_blobs(4, 60, 2, 0.5, 2).unwrap()
    }

    #[test]
    fn zero_ratio_is_identity() {
        let d = du();
        let nd = inject_symmetric(&d, 0.0, 1).unwrap();
        assert_eq!(nd.noisy_count(), 0);
        assert_eq!(nd.base.labels(), d.labels());
        let nd = inject_asymmetric(&d, 0.0, &[vec![0, 1], vec![2, 3]], 1).unwrap();
        assert_eq!(nd.base.labels(), d.labels());
    }

    #[test]
    fn full_ratio_binary_flips_everything() {
        let d = make_blobs(2, 30, 2, 0.5, 1).unwrap();
        let nd = inject_symmetric(&d, 1.0, 4).unwrap();
        for (o, t) in nd.base.labels().iter().zip(&nd.true_labels) {
            assert_eq!(*o, 1 - t);
        }
    }

    #[test]
    fn half_ratio_corrupts_exactly_half() {
        let nd = inject_symmetric(&du(), 0.5, 9).unwrap();
        assert_eq!(nd.noisy_count(), 120);
    }

    #[test]
    fn two_class_groups_have_a_single_alternative() {
        let d = du();
        let nd = inject_asymmetric(&d, 1.0, &[vec![0, 1], vec![2, 3]], 3).unwrap();
        for (o, t) in nd.base.labels().iter().zip(&nd.true_labels) {
            assert_eq!(*o, t ^ 1);
        }
    }

    #[test]
    fn corruption_count_floors() {
        assert_eq!(corruption_count(0.29, 100), 29);
        assert_eq!(corruption_count(0.1, 240), 24);
        assert_eq!(corruption_count(0.333, 10), 3);
        assert_eq!(corruption_count(1.0, 7), 7);
        assert_eq!(corruption_count(0.0, 7), 0);
    }

    #[test]
    fn asymmetric_without_map_errors() {
        let spec = NoiseSpec { kind: NoiseKind::Asymmetric, ratio: 0.5, superclass_map: None };
        assert!(matches!(inject(&du(), &spec, 0), Err(Error::Config(_))));
    }
}
