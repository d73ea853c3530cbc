use ndarray::{Array1, Array2, Axis};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Column-wise `(x - mean) / std`, fit on training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    /// Population standard deviation; constant columns carry 1.
    pub std: Array1<f64>,
}

pub fn fit_standardizer(train: &LabeledDataset) -> Standardizer {
    Standardizer::fit(train.features())
}

pub fn apply_standardizer(s: &Standardizer, d: &LabeledDataset) -> Result<LabeledDataset> {
    d.with_features(s.transform(d.features())?)
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let mut std = Array1::zeros(x.ncols());
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let var = col.iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            // rounding noise on a constant column must not be amplified
            let floor = 16.0 * f64::EPSILON * mean[j].abs().max(1.0);
            std[j] = if s > floor { s } else { 1.0 };
        }
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.ncols(),
            });
        }
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }
}
