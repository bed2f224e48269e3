use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Features plus hard labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Tensor,
    labels: Vec<usize>,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Tensor, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if features.shape().len() != 2 {
            return Err(Error::shape(format!("features must be a matrix, got {:?}", features.shape())));
        }
        if features.rows() != labels.len() {
            return Err(Error::shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if classes < 2 {
            return Err(Error::config(format!("need at least 2 classes, got {classes}")));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::config(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(Dataset {
            features,
            labels,
            classes,
        })
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dims(&self) -> usize {
        self.features.cols()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// Same features, different labels.
    pub fn relabel(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), labels, self.classes)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Symmetric,
    Asymmetric,
}

/// How labels get corrupted. Asymmetric noise keeps each corrupted label inside
/// its true class's superclass group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superclass_map: Option<Vec<Vec<usize>>>,
}

impl NoiseSpec {
    pub fn symmetric(ratio: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Symmetric,
            ratio,
            superclass_map: None,
        }
    }

    pub fn asymmetric(ratio: f64, groups: Vec<Vec<usize>>) -> Self {
        NoiseSpec {
            kind: NoiseKind::Asymmetric,
            ratio,
            superclass_map: Some(groups),
        }
    }

    /// Checks the ratio and, for asymmetric noise, that the groups partition
    /// `0..classes` with at least two classes per group. Returns the group id
    /// of every class when a map is present.
    pub fn validate(&self, classes: usize) -> Result<Option<Vec<usize>>> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::config(format!("noise ratio must lie in [0, 1], got {}", self.ratio)));
        }
        if classes < 2 {
            return Err(Error::config(format!("label noise needs at least 2 classes, got {classes}")));
        }
        let groups = match (&self.kind, &self.superclass_map) {
            (NoiseKind::Asymmetric, None) => {
                return Err(Error::config("asymmetric noise requires a superclass map"));
            }
            (_, None) => return Ok(None),
            (_, Some(g)) => g,
        };
        let mut owner = vec![usize::MAX; classes];
        for (gi, group) in groups.iter().enumerate() {
            if group.len() < 2 {
                return Err(Error::config(format!(
                    "superclass group {gi} has {} class(es); each group needs at least 2",
                    group.len()
                )));
            }
            for &c in group {
                if c >= classes {
                    return Err(Error::config(format!("superclass group {gi} names class {c} >= {classes}")));
                }
                if owner[c] != usize::MAX {
                    return Err(Error::config(format!("class {c} appears in more than one superclass group")));
                }
                owner[c] = gi;
            }
        }
        if let Some(c) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::config(format!("class {c} is not covered by the superclass map")));
        }
        Ok(Some(owner))
    }
}

/// Observed (possibly corrupted) labels alongside the ground truth. The truth
/// and flags exist for evaluation; the restoration pipeline never reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDataset {
    pub base: Dataset,
    pub true_labels: Vec<usize>,
    pub noise_flags: Vec<bool>,
    pub noise_spec: NoiseSpec,
}

impl NoisyDataset {
    pub fn new(base: Dataset, true_labels: Vec<usize>, noise_spec: NoiseSpec) -> Result<Self> {
        if true_labels.len() != base.len() {
            return Err(Error::shape(format!(
                "{} true labels for {} samples",
                true_labels.len(),
                base.len()
            )));
        }
        if let Some(&bad) = true_labels.iter().find(|&&y| y >= base.classes()) {
            return Err(Error::config(format!("true label {bad} out of range")));
        }
        let noise_flags = base
            .labels()
            .iter()
            .zip(&true_labels)
            .map(|(o, t)| o != t)
            .collect();
        Ok(NoisyDataset {
            base,
            true_labels,
            noise_flags,
            noise_spec,
        })
    }

    pub fn observed(&self) -> &Dataset {
        &self.base
    }

    /// The same features with ground-truth labels.
    pub fn truth(&self) -> Dataset {
        self.base
            .relabel(self.true_labels.clone())
            .expect("true labels validated at construction")
    }

    pub fn noisy_indices(&self) -> Vec<usize> {
        self.noise_flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }

    pub fn noisy_count(&self) -> usize {
        self.noise_flags.iter().filter(|&&f| f).count()
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::new(Tensor::from_rows(&[[0.0, 1.0], [2.0, 3.0]]).unwrap(), vec![0, 1], 2).unwrap()
    }

    #[test]
    fn rejects_out_of_range_labels() {
        let x = Tensor::from_rows(&[[0.0, 1.0]]).unwrap();
        assert!(Dataset::new(x.clone(), vec![2], 2).is_err());
        assert!(Dataset::new(x, vec![0, 1], 2).is_err());
    }

    #[test]
    fn flags_follow_label_disagreement() {
        let obs = tiny().relabel(vec![1, 1]).unwrap();
        let nd = NoisyDataset::new(obs, vec![0, 1], NoiseSpec::symmetric(0.5)).unwrap();
        assert_eq!(nd.noise_flags, vec![true, false]);
        assert_eq!(nd.noisy_indices(), vec![0]);
        assert_eq!(nd.truth().labels(), &[0, 1]);
    }

    #[test]
    fn superclass_map_validation() {
        assert!(NoiseSpec::asymmetric(0.5, vec![vec![0, 1], vec![2, 3]]).validate(4).is_ok());
        let err = |g: Vec<Vec<usize>>| NoiseSpec::asymmetric(0.5, g).validate(4).unwrap_err();
        assert!(err(vec![vec![0], vec![1, 2, 3]]).to_string().contains("at least 2"));
        assert!(err(vec![vec![0, 1], vec![1, 2, 3]]).to_string().contains("more than one"));
        assert!(err(vec![vec![0, 1], vec![2, 4]]).to_string().contains(">="));
        assert!(err(vec![vec![0, 1], vec![2, 2]]).to_string().contains("more than one"));
        assert!(err(vec![vec![0, 1]]).to_string().contains("not covered"));
        let none = NoiseSpec { kind: NoiseKind::Asymmetric, ratio: 0.5, superclass_map: None };
        assert!(none.validate(4).is_err());
        assert!(NoiseSpec::symmetric(1.5).validate(4).is_err());
    }
}
