//! Resamplers behind a common contract: the input rows come back first,
//! untouched, followed by synthetic minority rows until both classes have
//! the same size. Every sampler is a deterministic function of
//! `(dataset, spec)`.

mod adaptive;
mod alloc;
mod smote;

pub use adaptive::{
    adaptive_gmm_detailed, adaptive_gmm_resample, cluster_weights, smote_grid_generate,
    weight_rule, AdaptiveOutcome, ClusterWeighting, SyntheticPool,
};
pub use alloc::{allocate_counts, largest_remainder};
pub use smote::{adasyn, borderline_smote, random_oversample, smote, svm_smote};

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::neighbors::BallTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    None,
    Ros,
    Smote,
    #[serde(rename = "bsmote1")]
    BorderlineSmote1,
    #[serde(rename = "bsmote2")]
    BorderlineSmote2,
    #[serde(rename = "svmsmote")]
    SvmSmote,
    Adasyn,
    AdaptiveGmm,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 8] = [
        SamplerKind::None,
        SamplerKind::Ros,
        SamplerKind::Smote,
        SamplerKind::BorderlineSmote1,
        SamplerKind::BorderlineSmote2,
        SamplerKind::SvmSmote,
        SamplerKind::Adasyn,
        SamplerKind::AdaptiveGmm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::None => "none",
            SamplerKind::Ros => "ros",
            SamplerKind::Smote => "smote",
            SamplerKind::BorderlineSmote1 => "bsmote1",
            SamplerKind::BorderlineSmote2 => "bsmote2",
            SamplerKind::SvmSmote => "svmsmote",
            SamplerKind::Adasyn => "adasyn",
            SamplerKind::AdaptiveGmm => "adaptive_gmm",
        }
    }

    /// Whether the neighborhood size `k` affects this sampler.
    pub fn uses_k(self) -> bool {
        !matches!(self, SamplerKind::None | SamplerKind::Ros)
    }

    /// Whether the cluster fraction `eta` affects this sampler.
    pub fn uses_eta(self) -> bool {
        self == SamplerKind::AdaptiveGmm
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SamplerKind::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!(
                    "unknown sampler `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// A resampler and its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    /// Neighbor count.
    pub k: usize,
    /// Interpolation steps per neighbor pair in the adaptive pool.
    pub r: usize,
    /// Cluster count as a fraction of the class gap: `C = round((M - N) * eta)`.
    pub eta: f64,
    /// Responsibility above which a majority sample counts against a cluster.
    pub p_t: f64,
    /// Cluster weights at or below this are zeroed.
    pub w_t: f64,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            kind: SamplerKind::None,
            k: 5,
            r: 10,
            eta: 0.1,
            p_t: 0.5,
            w_t: 0.5,
            seed: 0,
        }
    }
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind) -> Self {
        SamplerSpec {
            kind,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.r < 1 {
            return Err(Error::Config("r must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        for (name, v) in [("p_t", self.p_t), ("w_t", self.w_t)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// How a synthetic row was built from input rows:
/// `x[base] + step * (x[toward] - x[base])`. Negative steps extrapolate
/// away from `toward`; `step == 0` is a plain copy of `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Origin {
    pub base: usize,
    pub toward: usize,
    pub step: f64,
}

/// A resampled dataset plus the provenance of each appended row.
#[derive(Debug, Clone)]
pub struct Resampling {
    pub dataset: LabeledDataset,
    /// One entry per synthetic row, in output order after the input rows.
    pub origins: Vec<Origin>,
}

/// Runs the sampler named by `spec.kind`.
pub fn resample(d: &LabeledDataset, spec: &SamplerSpec) -> Result<Resampling> {
    spec.validate()?;
    match spec.kind {
        SamplerKind::None => Ok(identity(d)),
        SamplerKind::Ros => random_oversample(d, spec),
        SamplerKind::Smote => smote(d, spec),
        SamplerKind::BorderlineSmote1 => borderline_smote(d, spec, 1),
        SamplerKind::BorderlineSmote2 => borderline_smote(d, spec, 2),
        SamplerKind::SvmSmote => svm_smote(d, spec),
        SamplerKind::Adasyn => adasyn(d, spec),
        SamplerKind::AdaptiveGmm => adaptive_gmm_detailed(d, spec).map(|o| o.resampling),
    }
}

pub(crate) fn identity(d: &LabeledDataset) -> Resampling {
    Resampling {
        dataset: d.clone(),
        origins: Vec::new(),
    }
}

pub(crate) fn interpolate(x: ArrayView2<f64>, o: &Origin) -> Vec<f64> {
    let a = x.row(o.base);
    let b = x.row(o.toward);
    a.iter().zip(b).map(|(p, q)| p + o.step * (q - p)).collect()
}

/// Appends the rows described by `origins` to `d`.
pub(crate) fn materialize(d: &LabeledDataset, origins: Vec<Origin>) -> Result<Resampling> {
    let x = d.features().view();
    let mut rows = Array2::zeros((origins.len(), d.n_features()));
    for (mut row, o) in rows.axis_iter_mut(Axis(0)).zip(&origins) {
        row.assign(&ndarray::aview1(&interpolate(x, o)));
    }
    Ok(Resampling {
        dataset: d.append_minority(&rows)?,
        origins,
    })
}

/// Clamps the minority neighbor count to `n_minority - 1`.
pub(crate) fn clamp_k(k: usize, n_minority: usize) -> usize {
    let cap = n_minority.saturating_sub(1);
    if k > cap {
        log::warn!("k = {k} exceeds minority size - 1; clamping to {cap}");
        cap
    } else {
        k
    }
}

/// Minority rows plus, for each, the dataset indices of its `k` nearest
/// minority neighbors.
pub(crate) struct MinorityNeighbors {
    pub indices: Vec<usize>,
    pub neighbors: Vec<Vec<usize>>,
}

pub(crate) fn minority_neighbors(d: &LabeledDataset, k: usize) -> Result<MinorityNeighbors> {
    let indices = d.minority_indices();
    if indices.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 minority samples, found {}",
            indices.len()
        )));
    }
    let k = clamp_k(k, indices.len());
    let rows = d.features().select(Axis(0), &indices);
    let tree = BallTree::new(rows.view())?;
    let neighbors = (0..indices.len())
        .map(|i| {
            Ok(tree
                .knn(i, k)?
                .into_iter()
                .map(|n| indices[n.index])
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(MinorityNeighbors { indices, neighbors })
}

/// For each row in `queries` (dataset indices), how many of its `k` nearest
/// neighbors in the whole dataset are majority, plus those neighbors.
pub(crate) fn full_neighborhoods(
    d: &LabeledDataset,
    queries: &[usize],
    k: usize,
) -> Result<(usize, Vec<Vec<usize>>)> {
    let k = k.min(d.n_samples() - 1);
    let tree = BallTree::new(d.features().view())?;
    let hoods = queries
        .iter()
        .map(|&q| Ok(tree.knn(q, k)?.into_iter().map(|n| n.index).collect()))
        .collect::<Result<_>>()?;
    Ok((k, hoods))
}
