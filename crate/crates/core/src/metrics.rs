//! Confusion counts with the minority class as positive, F-beta, accuracies
//! and cross-validation aggregation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

pub fn confusion<T: PartialEq>(
    y_true: &[T],
    y_pred: &[T],
    positive: &T,
) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::invalid("confusion counts need at least one sample"));
    }
    let mut c = ConfusionCounts::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

/// `(1 + b^2) P R / (b^2 P + R)`; 0 whenever a denominator vanishes.
pub fn f_beta(c: &ConfusionCounts, beta: f64) -> f64 {
    f_beta_from(c.precision(), c.recall(), beta)
}

pub fn f_beta_from(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / den
    }
}

/// Recall of the minority class.
pub fn minority_accuracy(c: &ConfusionCounts) -> f64 {
    c.recall()
}

pub fn overall_accuracy(c: &ConfusionCounts) -> f64 {
    ratio(c.tp + c.tn, c.total())
}

/// Per-fold scores with their mean and population variance.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub folds: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

pub fn aggregate(folds: &[f64]) -> Result<CvSummary> {
    if folds.is_empty() {
        return Err(Error::invalid("cannot aggregate zero folds"));
    }
    let k = folds.len() as f64;
    let mean = folds.iter().sum::<f64>() / k;
    let variance = folds.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    Ok(CvSummary {
        folds: folds.to_vec(),
        mean,
        variance,
    })
}
