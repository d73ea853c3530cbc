//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "datasets": [
//!     {"name": "pima", "keel": {"path": "data/pima.dat"}},
//!     {"name": "emo", "csv": {"path": "emo.csv", "label_column": "class", "positive_label": "angry"}},
//!     {"name": "clover", "clover": {"majority": 500, "minority": 100, "disturbance": 0, "seed": 1}}
//!   ],
//!   "samplers": [
//!     {"kind": "none"},
//!     {"kind": "smote", "k": [2, 3, 4, 5]},
//!     {"kind": "adaptive_gmm", "k": [3, 5], "eta": [0.1, 0.2], "r": 10}
//!   ],
//!   "folds": 5,
//!   "seed": 7,
//!   "metrics": ["f1", "f2", "minority_acc", "overall_acc"],
//!   "output": {"path": "report.md", "format": "markdown"},
//!   "audit": false
//! }
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.
//! Omitted grids default to `k = 2..=10` and `eta = 0.1, 0.2, .., 1.0`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{generate_clover, load_csv, load_keel, LabelColumn, LabeledDataset};
use crate::error::{Error, Result};
use crate::samplers::{SamplerKind, SamplerSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetConfig>,
    pub samplers: Vec<SamplerGrid>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "Metric::all")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    /// Check every fold for test rows leaking into the resampler input.
    #[serde(default)]
    pub audit: bool,
}

fn default_folds() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    #[serde(flatten)]
    pub source: DataSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Keel {
        path: PathBuf,
        #[serde(default)]
        positive_label: Option<String>,
    },
    Csv {
        path: PathBuf,
        /// `last`, a zero-based index, or a header name.
        #[serde(default = "default_label_column")]
        label_column: String,
        #[serde(default)]
        positive_label: Option<String>,
    },
    Clover {
        majority: usize,
        minority: usize,
        #[serde(default)]
        disturbance: u32,
        #[serde(default)]
        seed: u64,
    },
}

fn default_label_column() -> String {
    "last".into()
}

impl DataSource {
    pub fn load(&self) -> Result<LabeledDataset> {
        match self {
            DataSource::Keel {
                path,
                positive_label,
            } => load_keel(path, positive_label.as_deref()),
            DataSource::Csv {
                path,
                label_column,
                positive_label,
            } => {
                let col: LabelColumn = label_column.parse().expect("infallible");
                load_csv(path, &col, positive_label.as_deref())
            }
            DataSource::Clover {
                majority,
                minority,
                disturbance,
                seed,
            } => generate_clover(*majority, *minority, *disturbance, *seed),
        }
    }

    fn resolve(&mut self, base: &Path) {
        match self {
            DataSource::Keel { path, .. } | DataSource::Csv { path, .. } => {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            DataSource::Clover { .. } => {}
        }
    }
}

/// A sampler with the values to try for `k` and `eta`. Axes the sampler
/// ignores collapse to a single point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerGrid {
    pub kind: SamplerKind,
    #[serde(default)]
    pub k: Option<Vec<usize>>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default = "default_threshold")]
    pub p_t: f64,
    #[serde(default = "default_threshold")]
    pub w_t: f64,
}

fn default_r() -> usize {
    10
}

fn default_threshold() -> f64 {
    0.5
}

pub const DEFAULT_K_GRID: [usize; 9] = [2, 3, 4, 5, 6, 7, 8, 9, 10];
pub const DEFAULT_ETA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

impl SamplerGrid {
    pub fn new(kind: SamplerKind) -> Self {
        SamplerGrid {
            kind,
            k: None,
            eta: None,
            r: default_r(),
            p_t: default_threshold(),
            w_t: default_threshold(),
        }
    }

    /// Grid points ordered by `k`, then `eta`, both ascending.
    pub fn points(&self) -> Vec<SamplerSpec> {
        let base = SamplerSpec {
            kind: self.kind,
            r: self.r,
            p_t: self.p_t,
            w_t: self.w_t,
            ..SamplerSpec::default()
        };
        let mut ks = if self.kind.uses_k() {
            self.k.clone().unwrap_or_else(|| DEFAULT_K_GRID.to_vec())
        } else {
            vec![base.k]
        };
        ks.sort_unstable();
        ks.dedup();
        let mut etas = if self.kind.uses_eta() {
            self.eta
                .clone()
                .unwrap_or_else(|| DEFAULT_ETA_GRID.to_vec())
        } else {
            vec![base.eta]
        };
        etas.sort_by(f64::total_cmp);
        etas.dedup();
        ks.iter()
            .flat_map(|&k| etas.iter().map(move |&eta| SamplerSpec { k, eta, ..base }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1,
    F2,
    MinorityAcc,
    OverallAcc,
}

impl Metric {
    pub fn all() -> Vec<Metric> {
        vec![
            Metric::F1,
            Metric::F2,
            Metric::MinorityAcc,
            Metric::OverallAcc,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::F2 => "f2",
            Metric::MinorityAcc => "minority_acc",
            Metric::OverallAcc => "overall_acc",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

impl ExperimentConfig {
    pub fn from_json(text: &str, source: impl AsRef<Path>) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            path: source.as_ref().to_path_buf(),
            source: e,
        })
    }

    /// Reads and validates a config file, resolving relative paths against
    /// its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut cfg.datasets {
            d.source.resolve(base);
        }
        if let Some(out) = &mut cfg.output {
            if out.path.is_relative() {
                out.path = base.join(&out.path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets configured".into()));
        }
        if self.samplers.is_empty() {
            return Err(Error::Config("no samplers configured".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("no metrics requested".into()));
        }
        for g in &self.samplers {
            if g.k.as_ref().is_some_and(Vec::is_empty) || g.eta.as_ref().is_some_and(Vec::is_empty)
            {
                return Err(Error::Config(format!(
                    "empty grid axis for sampler {}",
                    g.kind
                )));
            }
            for spec in g.points() {
                spec.validate()?;
            }
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate dataset name `{}`", w[0])));
        }
        Ok(())
    }
}
