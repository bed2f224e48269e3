use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Probabilities are clamped to this floor before taking the log.
pub const LOG_FLOOR: f64 = 1e-12;

/// Mean over rows of `-Σ_k t_k · ln(max(p_k, LOG_FLOOR))`.
pub fn soft_ce_loss(probs: &Tensor, targets: &Tensor) -> Result<f64> {
    if probs.shape() != targets.shape() || probs.shape().len() != 2 {
        return Err(Error::shape(format!(
            "probs {:?} vs targets {:?}",
            probs.shape(),
            targets.shape()
        )));
    }
    let b = probs.rows();
    if b == 0 {
        return Err(Error::shape("empty batch"));
    }
    let total: f64 = probs
        .data()
        .iter()
        .zip(targets.data())
        .map(|(p, t)| if *t == 0.0 { 0.0 } else { -t * p.max(LOG_FLOOR).ln() })
        .sum();
    Ok(total / b as f64)
}

/// One-hot rows for hard labels.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Tensor> {
    let mut data = vec![0.0; labels.len() * classes];
    for (i, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::config(format!("label {y} out of range for {classes} classes")));
        }
        data[i * classes + y] = 1.0;
    }
    if labels.is_empty() {
        return Ok(Tensor::zeros(&[0, classes]));
    }
    Tensor::from_vec(&[labels.len(), classes], data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> Tensor {
        Tensor::from_rows(&[v]).unwrap()
    }

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let l = soft_ce_loss(&row(&[1.0, 0.0, 0.0]), &row(&[1.0, 0.0, 0.0])).unwrap();
        assert!(l.abs() < 1e-15);
    }

    #[test]
    fn uniform_prediction_costs_ln_k() {
        let third = 1.0 / 3.0;
        let l = soft_ce_loss(&row(&[third; 3]), &row(&[0.0, 1.0, 0.0])).unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn soft_target_matches_scalar_evaluation() {
        // -(0.75 ln 0.5 + 0.125 ln 0.25 + 0.125 ln 0.25) = 0.75 ln 2 + 0.25 · 2 ln 2 = 1.25 ln 2
        let expect = 1.25 * 2f64.ln();
        let l = soft_ce_loss(&row(&[0.5, 0.25, 0.25]), &row(&[0.75, 0.125, 0.125])).unwrap();
        assert!((l - expect).abs() < 1e-12);
        assert!((expect - 0.866_433_975_699_931_6).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_is_clamped() {
        let l = soft_ce_loss(&row(&[0.0, 1.0]), &row(&[1.0, 0.0])).unwrap();
        assert!((l - (-LOG_FLOOR.ln())).abs() < 1e-9);
    }

    #[test]
    fn mismatched_shapes_error() {
        assert!(matches!(
            soft_ce_loss(&row(&[0.5, 0.5]), &row(&[1.0, 0.0, 0.0])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn averages_over_rows() {
        let p = Tensor::from_rows(&[[0.5, 0.5], [0.25, 0.75]]).unwrap();
        let t = Tensor::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let expect = (2f64.ln() + 4f64.ln()) / 2.0;
        assert!((soft_ce_loss(&p, &t).unwrap() - expect).abs() < 1e-12);
    }
}
