//! Accuracy, noisy-subset error, confusion matrices and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::confidence::predict;
use crate::data::{Dataset, NoisyDataset};
use crate::error::{Error, Result};
use crate::nn::{hidden_activations, MlpParams};
use crate::tensor::Tensor;

fn predicted_labels(params: &MlpParams, x: &Tensor) -> Result<Vec<usize>> {
    Ok(predict(params, x)?.into_iter().map(|p| p.label).collect())
}

fn check_model(params: &MlpParams, d: &Dataset) -> Result<()> {
    if params.classes() != d.classes() {
        return Err(Error::Eval(format!(
            "model has {} classes, dataset has {}",
            params.classes(),
            d.classes()
        )));
    }
    Ok(())
}

/// Fraction of samples whose argmax prediction equals the label.
pub fn accuracy(params: &MlpParams, d: &Dataset) -> Result<f64> {
    check_model(params, d)?;
    if d.is_empty() {
        return Err(Error::Eval("accuracy of an empty dataset".into()));
    }
    let pred = predicted_labels(params, d.features())?;
    let hits = pred.iter().zip(d.labels()).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / d.len() as f64)
}

/// Error against the true labels, restricted to the corrupted samples.
pub fn noisy_subset_error(params: &MlpParams, nd: &NoisyDataset) -> Result<f64> {
    check_model(params, &nd.base)?;
    let idx = nd.noisy_indices();
    if idx.is_empty() {
        return Err(Error::Eval("no corrupted samples to evaluate".into()));
    }
    let pred = predicted_labels(params, &nd.base.features().select_rows(&idx))?;
    let wrong = pred.iter().zip(&idx).filter(|(p, &i)| **p != nd.true_labels[i]).count();
    Ok(wrong as f64 / idx.len() as f64)
}

/// `K × K` counts; row = reference label, column = prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion(pub Vec<Vec<u64>>);

impl Confusion {
    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        self.0.iter().enumerate().map(|(i, r)| r[i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.0.iter().map(|r| r.iter().sum()).collect()
    }

    /// Header of class ids, then one row per reference class.
    pub fn to_csv(&self) -> String {
        let k = self.0.len();
        let mut s = (0..k).map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        s.push('\n');
        for r in &self.0 {
            let _ = writeln!(s, "{}", r.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        }
        s
    }
}

pub fn confusion(params: &MlpParams, x: &Tensor, labels: &[usize], classes: usize) -> Result<Confusion> {
    if labels.is_empty() {
        return Err(Error::Eval("confusion matrix of an empty dataset".into()));
    }
    if x.rows() != labels.len() || params.classes() != classes {
        return Err(Error::Eval("confusion inputs do not line up".into()));
    }
    let mut m = vec![vec![0u64; classes]; classes];
    for (p, &y) in predicted_labels(params, x)?.into_iter().zip(labels) {
        m[y][p] += 1;
    }
    Ok(Confusion(m))
}

/// Which labels of a noisy dataset a confusion matrix is computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelField {
    Observed,
    True,
}

pub fn confusion_noisy(params: &MlpParams, nd: &NoisyDataset, field: LabelField) -> Result<Confusion> {
    let labels = match field {
        LabelField::Observed => nd.base.labels(),
        LabelField::True => &nd.true_labels,
    };
    confusion(params, nd.base.features(), labels, nd.base.classes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub dataset: String,
    /// Supplied by the caller so repeated emissions stay byte-identical.
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub test_accuracy: f64,
    /// Present when the evaluated data carries corrupted samples.
    pub noisy_subset_error: Option<f64>,
    pub confusion: Confusion,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

pub const REPORT_CSV_HEADER: [&str; 7] = [
    "config_hash",
    "seed",
    "dataset",
    "timestamp",
    "test_accuracy",
    "noisy_subset_error",
    "confusion",
];

fn encode_confusion(c: &Confusion) -> String {
    c.0.iter()
        .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";")
}

fn decode_confusion(s: &str) -> std::result::Result<Confusion, String> {
    s.split(';')
        .map(|r| {
            r.split_whitespace()
                .map(|v| v.parse::<u64>().map_err(|e| format!("confusion entry `{v}`: {e}")))
                .collect()
        })
        .collect::<std::result::Result<Vec<Vec<u64>>, _>>()
        .map(Confusion)
}

impl MetricsReport {
    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    /// Header plus one data row; columns as in [`REPORT_CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        let m = &self.metadata;
        w.write_record(REPORT_CSV_HEADER).expect("in-memory write");
        w.write_record([
            m.config_hash.clone(),
            m.seed.to_string(),
            m.dataset.clone(),
            m.timestamp.clone(),
            format!("{:?}", self.test_accuracy),
            self.noisy_subset_error.map(|v| format!("{v:?}")).unwrap_or_default(),
            encode_confusion(&self.confusion),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| e.to_string())?.clone();
        if headers.iter().ne(REPORT_CSV_HEADER) {
            return Err(format!("unexpected header {headers:?}"));
        }
        let rec = r
            .records()
            .next()
            .ok_or("missing data row")?
            .map_err(|e| e.to_string())?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("{}: {e}", REPORT_CSV_HEADER[i]));
        Ok(MetricsReport {
            test_accuracy: num(4)?,
            noisy_subset_error: if rec[5].is_empty() { None } else { Some(num(5)?) },
            confusion: decode_confusion(&rec[6])?,
            metadata: ReportMetadata {
                config_hash: rec[0].to_string(),
                seed: rec[1].parse().map_err(|e| format!("seed: {e}"))?,
                dataset: rec[2].to_string(),
                timestamp: rec[3].to_string(),
            },
        })
    }
}

pub fn emit_report(report: &MetricsReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<MetricsReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        ReportFormat::Csv => MetricsReport::from_csv(&text),
        ReportFormat::Json => MetricsReport::from_json(&text),
    }
    .map_err(|m| Error::format(path, m))
}

pub fn write_confusion_csv(c: &Confusion, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, c.to_csv()).map_err(|e| Error::io(path, e))
}

/// Last-hidden-layer activations, one row per sample, with the reference label.
pub fn write_activations(params: &MlpParams, d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let h = hidden_activations(params, d.features())?;
    let mut s = (0..h.cols()).map(|i| format!("h{i}")).collect::<Vec<_>>().join(",");
    s.push_str(",label\n");
    for (row, y) in h.row_iter().zip(d.labels()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "{},{y}", cells.join(","));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Builds a report on a clean test set, adding noisy-subset error when a
/// noisy training set is supplied.
pub fn evaluate(
    params: &MlpParams,
    test: &Dataset,
    noisy: Option<&NoisyDataset>,
    metadata: ReportMetadata,
) -> Result<MetricsReport> {
    let noisy_subset_error = match noisy {
        Some(nd) if nd.noisy_count() > 0 => Some(noisy_subset_error(params, nd)?),
        _ => None,
    };
    Ok(MetricsReport {
        test_accuracy: accuracy(params, test)?,
        noisy_subset_error,
        confusion: confusion(params, test.features(), test.labels(), test.classes())?,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{inject_symmetric, make_blobs, NoiseSpec};
    use crate::nn::{init_params, Dense};

    /// A net whose output depends only on its bias.
    fn constant_model(k: usize, d: usize, class: usize) -> MlpParams {
        let mut bias = vec![0.0; k];
        bias[class] = 5.0;
        MlpParams::from_layers(vec![Dense {
            weight: Tensor::zeros(&[k, d]),
            bias: Tensor::from_vec(&[k], bias).unwrap(),
        }])
        .unwrap()
    }

    /// Nearest-centre classifier for blobs: equal-norm centres make it linear.
    fn centre_model(d: &Dataset) -> MlpParams {
        let centres = crate::data::blob_centers(d.classes(), d.dims(), 0.5);
        let w: Vec<f64> = centres.iter().flatten().map(|v| v * 10.0).collect();
        MlpParams::from_layers(vec![Dense {
            weight: Tensor::from_vec(&[d.classes(), d.dims()], w).unwrap(),
            bias: Tensor::zeros(&[d.classes()]),
        }])
        .unwrap()
    }

    #[test]
    fn constant_prediction_on_balanced_set() {
        let d = make_blobs(4, 25, 2, 0.5, 0).unwrap();
        assert_eq!(accuracy(&constant_model(4, 2, 1), &d).unwrap(), 0.25);
    }

    #[test]
    fn accuracy_matches_confusion_trace() {
        let d = make_blobs(4, 25, 2, 0.5, 0).unwrap();
        let p = init_params(&[2, 5, 4], 3).unwrap();
        let c = confusion(&p, d.features(), d.labels(), 4).unwrap();
        assert_eq!(c.total(), 100);
        assert_eq!(c.row_sums(), vec![25; 4]);
        assert!((c.accuracy() - accuracy(&p, &d).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn separable_fit_is_perfect_and_diagonal() {
        let d = make_blobs(4, 25, 2, 0.5, 0).unwrap();
        let m = centre_model(&d);
        assert_eq!(accuracy(&m, &d).unwrap(), 1.0);
        let c = confusion(&m, d.features(), d.labels(), 4).unwrap();
        for (i, r) in c.0.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                assert_eq!(v, if i == j { 25 } else { 0 });
            }
        }
    }

    #[test]
    fn noisy_subset_error_extremes() {
        let d = make_blobs(4, 25, 2, 0.5, 0).unwrap();
        let nd = inject_symmetric(&d, 0.4, 2).unwrap();
        assert_eq!(noisy_subset_error(&centre_model(&d), &nd).unwrap(), 0.0);
    }

    #[test]
    fn memorising_model_is_always_wrong_on_noisy_subset() {
        // One-hot features let a linear layer reproduce any labelling.
        let n = 40;
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        let labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let d = Dataset::new(Tensor::from_vec(&[n, n], eye).unwrap(), labels, 4).unwrap();
        let nd = inject_symmetric(&d, 0.5, 3).unwrap();
        let mut w = vec![0.0; 4 * n];
        for (i, &y) in nd.base.labels().iter().enumerate() {
            w[y * n + i] = 50.0;
        }
        let memoriser = MlpParams::from_layers(vec![Dense {
            weight: Tensor::from_vec(&[4, n], w).unwrap(),
            bias: Tensor::zeros(&[4]),
        }])
        .unwrap();
        assert_eq!(accuracy(&memoriser, &nd.base).unwrap(), 1.0);
        assert_eq!(noisy_subset_error(&memoriser, &nd).unwrap(), 1.0);
    }

    #[test]
    fn empty_inputs_are_evaluation_errors() {
        let d = make_blobs(2, 3, 2, 0.5, 0).unwrap();
        let p = init_params(&[2, 2], 0).unwrap();
        let empty = d.subset(&[]);
        assert!(matches!(accuracy(&p, &empty), Err(Error::Eval(_))));
        assert!(matches!(confusion(&p, empty.features(), empty.labels(), 2), Err(Error::Eval(_))));
        let clean = NoisyDataset::new(d.clone(), d.labels().to_vec(), NoiseSpec::symmetric(0.0)).unwrap();
        assert!(matches!(noisy_subset_error(&p, &clean), Err(Error::Eval(_))));
    }

    fn sample_report() -> MetricsReport {
        MetricsReport {
            test_accuracy: 0.123_456_789_012_345_67,
            noisy_subset_error: Some(1.0 / 3.0),
            confusion: Confusion(vec![vec![3, 1], vec![0, 4]]),
            metadata: ReportMetadata {
                config_hash: "abc123".into(),
                seed: 7,
                dataset: "blobs(k=2, n=8)".into(),
                timestamp: "fixed".into(),
            },
        }
    }

    #[test]
    fn report_roundtrips_and_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample_report();
        for fmt in [ReportFormat::Json, ReportFormat::Csv] {
            let p = dir.path().join(format!("r.{}", fmt.extension()));
            emit_report(&r, &p, fmt).unwrap();
            let first = fs::read(&p).unwrap();
            emit_report(&r, &p, fmt).unwrap();
            assert_eq!(first, fs::read(&p).unwrap());
            assert_eq!(read_report(&p, fmt).unwrap(), r);
        }
        let no_nse = MetricsReport { noisy_subset_error: None, ..r };
        assert_eq!(MetricsReport::from_csv(&no_nse.to_csv()).unwrap(), no_nse);
    }

    #[test]
    fn json_keys_are_sorted() {
        let json = sample_report().to_json();
        let c = json.find("\"confusion\"").unwrap();
        let m = json.find("\"metadata\"").unwrap();
        let n = json.find("\"noisy_subset_error\"").unwrap();
        let t = json.find("\"test_accuracy\"").unwrap();
        assert!(c < m && m < n && n < t);
        assert!(json.find("\"config_hash\"").unwrap() < json.find("\"dataset\"").unwrap());
    }

    #[test]
    fn bad_path_is_named_in_error() {
        let err = emit_report(&sample_report(), "/no/such/dir/report.json", ReportFormat::Json).unwrap_err();
        assert!(err.to_string().contains("/no/such/dir/report.json"));
    }
}
