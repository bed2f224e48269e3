//! CSV files: `f0,...,f{d-1},label`, with `true_label,is_noisy` appended for
//! noisy datasets. Reals are written in shortest round-trip form.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::data::{Dataset, NoiseSpec, NoisyDataset};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn header(dims: usize, noisy: bool) -> Vec<String> {
    let mut h: Vec<String> = (0..dims).map(|i| format!("f{i}")).collect();
    h.push("label".into());
    if noisy {
        h.push("true_label".into());
        h.push("is_noisy".into());
    }
    h
}

fn write_rows(path: &Path, dims: usize, rows: impl Iterator<Item = Vec<String>>, noisy: bool) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header(dims, noisy).join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

fn feature_cells(row: &[f64]) -> Vec<String> {
    row.iter().map(|v| format!("{v:?}")).collect()
}

pub fn write_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let rows = d.features().row_iter().zip(d.labels()).map(|(r, y)| {
        let mut cells = feature_cells(r);
        cells.push(y.to_string());
        cells
    });
    write_rows(path.as_ref(), d.dims(), rows, false)
}

pub fn write_noisy(nd: &NoisyDataset, path: impl AsRef<Path>) -> Result<()> {
    let d = &nd.base;
    let rows = d
        .features()
        .row_iter()
        .zip(d.labels())
        .zip(nd.true_labels.iter().zip(&nd.noise_flags))
        .map(|((r, y), (t, f))| {
            let mut cells = feature_cells(r);
            cells.push(y.to_string());
            cells.push(t.to_string());
            cells.push(u8::from(*f).to_string());
            cells
        });
    write_rows(path.as_ref(), d.dims(), rows, true)
}

struct Parsed {
    features: Vec<f64>,
    dims: usize,
    labels: Vec<usize>,
    truth: Option<Vec<usize>>,
}

fn parse(path: &Path) -> Result<Parsed> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let label_col = names
        .iter()
        .position(|&h| h == "label")
        .ok_or_else(|| Error::format(path, "missing `label` column"))?;
    let truth_col = names.iter().position(|&h| h == "true_label");
    if label_col == 0 {
        return Err(Error::format(path, "no feature columns before `label`"));
    }
    for (i, h) in names[..label_col].iter().enumerate() {
        if *h != format!("f{i}") {
            return Err(Error::format(path, format!("feature column {i} is named `{h}`, expected `f{i}`")));
        }
    }
    let dims = label_col;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut truth = truth_col.map(|_| Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let at = |c: usize| -> Result<&str> {
            rec.get(c)
                .ok_or_else(|| Error::format(path, format!("row {}: missing column {c}", line + 2)))
        };
        for c in 0..dims {
            let v: f64 = at(c)?
                .trim()
                .parse()
                .map_err(|_| Error::format(path, format!("row {}: bad number `{}`", line + 2, at(c).unwrap_or(""))))?;
            if !v.is_finite() {
                return Err(Error::format(path, format!("row {}: non-finite feature", line + 2)));
            }
            features.push(v);
        }
        let int = |c: usize| -> Result<usize> {
            at(c)?
                .trim()
                .parse()
                .map_err(|_| Error::format(path, format!("row {}: bad label in column {c}", line + 2)))
        };
        labels.push(int(label_col)?);
        if let (Some(col), Some(t)) = (truth_col, truth.as_mut()) {
            t.push(int(col)?);
        }
    }
    Ok(Parsed {
        features,
        dims,
        labels,
        truth,
    })
}

fn build(path: &Path, p: &Parsed, labels: Vec<usize>, classes: Option<usize>) -> Result<Dataset> {
    if labels.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let observed_max = p.labels.iter().chain(p.truth.iter().flatten()).max().copied().unwrap_or(0);
    let k = classes.unwrap_or(observed_max + 1).max(2);
    let x = Tensor::from_vec(&[labels.len(), p.dims], p.features.clone())?;
    Dataset::new(x, labels, k).map_err(|e| Error::format(path, e.to_string()))
}

/// Reads a dataset. `classes` defaults to one more than the largest label seen.
pub fn read_dataset(path: impl AsRef<Path>, classes: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let p = parse(path)?;
    build(path, &p, p.labels.clone(), classes)
}

/// Reads a noisy dataset written by [`write_noisy`]. The `is_noisy` column is
/// recomputed from the two label columns.
pub fn read_noisy(path: impl AsRef<Path>, classes: Option<usize>, spec: NoiseSpec) -> Result<NoisyDataset> {
    let path = path.as_ref();
    let p = parse(path)?;
    let truth = p
        .truth
        .clone()
        .ok_or_else(|| Error::format(path, "missing `true_label` column"))?;
    let base = build(path, &p, p.labels.clone(), classes)?;
    NoisyDataset::new(base, truth, spec).map_err(|e| Error::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{inject_symmetric, make_blobs};

    #[test]
    fn dataset_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let d = make_blobs(3, 5, 2, 0.7, 4).unwrap();
        let p = dir.path().join("d.csv");
        write_dataset(&d, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("f0,f1,label\n"));
        assert_eq!(read_dataset(&p, Some(3)).unwrap(), d);
    }

    #[test]
    fn noisy_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let d = make_blobs(4, 6, 3, 0.5, 4).unwrap();
        let nd = inject_symmetric(&d, 0.5, 1).unwrap();
        let p = dir.path().join("n.csv");
        write_noisy(&nd, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("f0,f1,f2,label,true_label,is_noisy\n"));
        assert_eq!(text.lines().filter(|l| l.ends_with(",1")).count(), 12);
        let back = read_noisy(&p, Some(4), nd.noise_spec.clone()).unwrap();
        assert_eq!(back, nd);
    }

    #[test]
    fn errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "f0,f1,label\n1.0,abc,0\n").unwrap();
        let err = read_dataset(&p, None).unwrap_err().to_string();
        assert!(err.contains("bad.csv"), "{err}");
        std::fs::write(&p, "x,y\n1,2\n").unwrap();
        assert!(read_dataset(&p, None).is_err());
    }
}
