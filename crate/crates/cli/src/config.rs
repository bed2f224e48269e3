//! Experiment configuration, read from TOML.
//!
//! Every section is optional; omitted values fall back to the blobs
//! benchmark defaults. Command-line flags are applied on top.
//!
//! ```toml
//! seed = 0
//! out = "runs/blobs"
//!
//! [dataset]
//! kind = "blobs"        # or "csv" with `path` and `test_path`
//! classes = 4
//! per_class = 250
//! dims = 2
//! spread = 1.0
//! test_per_class = 250
//!
//! [split]
//! ratio = 0.4
//!
//! [noise]
//! kind = "symmetric"    # or "asymmetric" with superclass_map = [[0, 1], [2, 3]]
//! ratio = 0.5
//!
//! [net]
//! layers = [2, 64, 64, 4]
//!
//! [train]               # initial model; [degrade] has the same keys
//! epochs = 30
//! batch_size = 32
//! lr = 0.02
//! momentum = 0.9
//! weight_decay = 0.001
//!
//! [lur]
//! tau = 0.75
//! lambda_u = 0.02
//! iterations = 10
//! toggles = { unlearn = true, smooth = true, mixup = true }
//!
//! [restore]
//! degradation_threshold = 0.1
//!
//! [sweep]
//! etas = [0.1, 0.25, 0.5, 0.75, 0.9]
//! seeds = [0, 1, 2, 3, 4]
//! toggle_sets = ["ul+ls+mp"]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use colur::bench::BenchmarkConfig;
use colur::data::{NoiseKind, NoiseSpec};
use colur::lur::{LurConfig, Toggles, TrainSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Blobs,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub classes: usize,
    pub per_class: usize,
    pub dims: usize,
    pub spread: f64,
    pub test_per_class: usize,
    /// Features plus `label` column; split into initial and incremental parts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let b = BenchmarkConfig::default().blobs;
        DatasetConfig {
            kind: DatasetKind::Blobs,
            classes: b.classes,
            per_class: b.per_class,
            dims: b.dims,
            spread: b.spread,
            test_per_class: b.test_per_class,
            path: None,
            test_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Fraction of each class that goes to the initial training set.
    pub ratio: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratio: BenchmarkConfig::default().split_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub superclass_map: Option<Vec<Vec<usize>>>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let n = BenchmarkConfig::default().noise;
        NoiseConfig {
            kind: n.kind,
            ratio: n.ratio,
            superclass_map: n.superclass_map,
        }
    }
}

impl NoiseConfig {
    pub fn spec(&self) -> NoiseSpec {
        NoiseSpec {
            kind: self.kind,
            ratio: self.ratio,
            superclass_map: self.superclass_map.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    /// Input width, hidden widths, class count.
    pub layers: Vec<usize>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            layers: BenchmarkConfig::default().layer_sizes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RestoreConfig {
    /// Minimum test-accuracy drop of the degraded model below which `restore`
    /// warns that there is little to restore.
    pub degradation_threshold: f64,
}

impl Default for RestoreConfig {
    fn default() -> Self {
        RestoreConfig {
            degradation_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub etas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Toggle labels such as `ul+ls+mp`, `ls`, `none`, or `all` for every
    /// combination.
    pub toggle_sets: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            etas: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            seeds: (0..5).collect(),
            toggle_sets: vec![Toggles::ALL.label()],
        }
    }
}

impl SweepConfig {
    pub fn toggles(&self) -> CliResult<Vec<Toggles>> {
        let mut out = Vec::new();
        for s in &self.toggle_sets {
            if s.trim() == "all" {
                out.extend(Toggles::all_combinations());
            } else {
                out.push(Toggles::parse(s).map_err(|e| CliError::field("sweep.toggle_sets", e))?);
            }
        }
        out.dedup();
        Ok(out)
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("colur-out")
}

fn default_timestamp() -> String {
    "1970-01-01T00:00:00Z".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Stamped into reports. Fixed unless configured, so reruns stay
    /// byte-identical.
    #[serde(default = "default_timestamp")]
    pub timestamp: String,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub net: NetConfig,
    #[serde(default = "default_train")]
    pub train: TrainSpec,
    #[serde(default = "default_degrade")]
    pub degrade: TrainSpec,
    #[serde(default)]
    pub lur: LurConfig,
    #[serde(default)]
    pub restore: RestoreConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_train() -> TrainSpec {
    BenchmarkConfig::default().initial
}

fn default_degrade() -> TrainSpec {
    BenchmarkConfig::default().degrade
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

fn check_train(section: &str, t: &TrainSpec) -> CliResult<()> {
    if t.epochs == 0 {
        return Err(CliError::field(&format!("{section}.epochs"), "must be >= 1"));
    }
    if t.batch_size == 0 {
        return Err(CliError::field(&format!("{section}.batch_size"), "must be >= 1"));
    }
    if !(t.lr > 0.0 && t.lr.is_finite()) {
        return Err(CliError::field(&format!("{section}.lr"), format!("must be positive, got {}", t.lr)));
    }
    t.validate().map_err(|e| CliError::field(section, e))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {}", path.display(), e.message())))
    }

    pub fn classes(&self) -> usize {
        *self.net.layers.last().unwrap_or(&0)
    }

    /// Cross-field checks. Errors name the offending field.
    pub fn validate(&self) -> CliResult<()> {
        let d = &self.dataset;
        let layers = &self.net.layers;
        if layers.len() < 2 {
            return Err(CliError::field("net.layers", "needs at least an input and an output size"));
        }
        if let Some(i) = layers.iter().position(|&w| w == 0) {
            return Err(CliError::field(&format!("net.layers[{i}]"), "layer sizes must be >= 1"));
        }
        match d.kind {
            DatasetKind::Blobs => {
                if d.classes < 2 {
                    return Err(CliError::field("dataset.classes", "must be >= 2"));
                }
                if d.dims < 2 {
                    return Err(CliError::field("dataset.dims", "must be >= 2"));
                }
                if d.per_class == 0 {
                    return Err(CliError::field("dataset.per_class", "must be >= 1"));
                }
                if d.test_per_class == 0 {
                    return Err(CliError::field("dataset.test_per_class", "must be >= 1"));
                }
                if !(d.spread > 0.0 && d.spread.is_finite()) {
                    return Err(CliError::field("dataset.spread", "must be positive"));
                }
                if layers[0] != d.dims {
                    return Err(CliError::field(
                        "net.layers",
                        format!("input size {} does not match dataset.dims {}", layers[0], d.dims),
                    ));
                }
                if self.classes() != d.classes {
                    return Err(CliError::field(
                        "net.layers",
                        format!("output size {} does not match dataset.classes {}", self.classes(), d.classes),
                    ));
                }
            }
            DatasetKind::Csv => {
                if d.path.is_none() {
                    return Err(CliError::field("dataset.path", "required when dataset.kind = \"csv\""));
                }
                if d.test_path.is_none() {
                    return Err(CliError::field("dataset.test_path", "required when dataset.kind = \"csv\""));
                }
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(CliError::field("split.ratio", format!("must lie in (0, 1), got {}", self.split.ratio)));
        }
        if !(0.0..=1.0).contains(&self.noise.ratio) {
            return Err(CliError::field("noise.ratio", format!("must lie in [0, 1], got {}", self.noise.ratio)));
        }
        if self.noise.kind == NoiseKind::Asymmetric && self.noise.superclass_map.is_none() {
            return Err(CliError::field("noise.superclass_map", "required for asymmetric noise"));
        }
        if self.noise.superclass_map.is_some() {
            self.noise
                .spec()
                .validate(self.classes())
                .map_err(|e| CliError::field("noise.superclass_map", e))?;
        }
        check_train("train", &self.train)?;
        check_train("degrade", &self.degrade)?;
        self.lur.validate().map_err(|e| CliError::field("lur", e))?;
        if !(self.restore.degradation_threshold >= 0.0) {
            return Err(CliError::field("restore.degradation_threshold", "must be >= 0"));
        }
        if let Some(e) = self.sweep.etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(CliError::field("sweep.etas", format!("{e} is outside [0, 1]")));
        }
        self.sweep.toggles()?;
        Ok(())
    }

    /// Creates the output directory; failure is a configuration error.
    pub fn ensure_out(&self) -> CliResult<()> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::field("out", format!("cannot create {}: {e}", self.out.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded. The output
    /// directory is left out so relocated reruns hash the same.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn dataset_name(&self) -> String {
        match (&self.dataset.kind, &self.dataset.path) {
            (DatasetKind::Csv, Some(p)) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            _ => "blobs".into(),
        }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}
