//! Datasets: the binary labelled container, loaders, per-fold
//! standardization, stratified splitting and the synthetic clover generator.

mod clover;
mod csv_io;
mod folds;
mod keel;
mod standardize;

pub use clover::{generate_clover, in_clover, CLOVER_BAND_WIDTH, CLOVER_PETALS, CLOVER_RADIUS};
pub use csv_io::{load_csv, save_csv, LabelColumn};
pub use folds::{stratified_kfold, FoldPlan};
pub use keel::{load_keel, parse_keel};
pub use standardize::{apply_standardizer, fit_standardizer, Standardizer};

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Dense feature matrix with binary labels and a designated minority class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<String>,
    minority_label: String,
    majority_label: String,
    feature_names: Option<Vec<String>>,
}

fn class_counts(labels: &[String]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.as_str()).or_insert(0) += 1;
    }
    counts
}

fn validate_shape(features: &Array2<f64>, labels: &[String]) -> Result<()> {
    if features.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.nrows(),
            got: labels.len(),
        });
    }
    if features.nrows() < 2 {
        return Err(Error::invalid("a dataset needs at least 2 samples"));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    Ok(())
}

impl LabeledDataset {
    /// Builds a dataset, picking the rarer class as minority. On a tie the
    /// minority is `positive_label` if it names one of the two classes, and
    /// otherwise the class that sorts first.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<String>,
        positive_label: Option<&str>,
    ) -> Result<Self> {
        validate_shape(&features, &labels)?;
        let counts = class_counts(&labels);
        if counts.len() != 2 {
            return Err(Error::NotBinary(counts.len()));
        }
        let classes: Vec<(&str, usize)> = counts.into_iter().collect();
        let (a, na) = classes[0];
        let (b, nb) = classes[1];
        let minority = if na < nb {
            a
        } else if nb < na {
            b
        } else {
            match positive_label {
                Some(p) if p == b => b,
                _ => a,
            }
        };
        let majority = if minority == a { b } else { a };
        Ok(LabeledDataset {
            minority_label: minority.to_string(),
            majority_label: majority.to_string(),
            features,
            labels,
            feature_names: None,
        })
    }

    /// Builds a dataset with an explicit minority class. The minority may not
    /// outnumber the other class.
    pub fn with_minority(
        features: Array2<f64>,
        labels: Vec<String>,
        minority_label: &str,
    ) -> Result<Self> {
        validate_shape(&features, &labels)?;
        let counts = class_counts(&labels);
        if counts.len() != 2 {
            return Err(Error::NotBinary(counts.len()));
        }
        let n_min = *counts.get(minority_label).ok_or_else(|| {
            Error::invalid(format!("minority label `{minority_label}` not present"))
        })?;
        let (majority, n_maj) = counts
            .iter()
            .find(|(k, _)| **k != minority_label)
            .map(|(k, v)| (k.to_string(), *v))
            .expect("two classes");
        if n_min > n_maj {
            return Err(Error::invalid(format!(
                "label `{minority_label}` has {n_min} samples, more than `{majority}` ({n_maj})"
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            minority_label: minority_label.to_string(),
            majority_label: majority,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn minority_label(&self) -> &str {
        &self.minority_label
    }

    pub fn majority_label(&self) -> &str {
        &self.majority_label
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_minority(&self, i: usize) -> bool {
        self.labels[i] == self.minority_label
    }

    pub fn minority_indices(&self) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.is_minority(i))
            .collect()
    }

    pub fn majority_indices(&self) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| !self.is_minority(i))
            .collect()
    }

    /// N, the minority count.
    pub fn minority_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| **l == self.minority_label)
            .count()
    }

    /// M, the majority count.
    pub fn majority_count(&self) -> usize {
        self.n_samples() - self.minority_count()
    }

    pub fn imbalance_ratio(&self) -> f64 {
        self.majority_count() as f64 / self.minority_count() as f64
    }

    /// +1 for minority rows, -1 otherwise.
    pub fn signed_targets(&self) -> Vec<f64> {
        (0..self.n_samples())
            .map(|i| if self.is_minority(i) { 1.0 } else { -1.0 })
            .collect()
    }

    /// Rows at `indices`, keeping this dataset's minority designation.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let mut out = Self::with_minority(features, labels, &self.minority_label)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Same labels, new feature matrix of identical shape.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Self> {
        if features.dim() != self.features.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: features.ncols(),
            });
        }
        let mut out = self.clone();
        out.features = features;
        Ok(out)
    }

    /// Appends `rows` labelled as minority. The result keeps the minority
    /// designation even when the classes end up equal in size.
    pub fn append_minority(&self, rows: &Array2<f64>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Ok(self.clone());
        }
        if rows.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: rows.ncols(),
            });
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("synthetic rows"));
        }
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), rows.view()])
            .expect("column counts checked");
        let mut labels = self.labels.clone();
        labels.extend(std::iter::repeat_n(
            self.minority_label.clone(),
            rows.nrows(),
        ));
        Ok(LabeledDataset {
            features,
            labels,
            minority_label: self.minority_label.clone(),
            majority_label: self.majority_label.clone(),
            feature_names: self.feature_names.clone(),
        })
    }
}
