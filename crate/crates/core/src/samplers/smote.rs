//! Random oversampling and the SMOTE family.

use rand::Rng;

use super::{
    full_neighborhoods, identity, largest_remainder, materialize, minority_neighbors, Origin,
    Resampling, SamplerSpec,
};
use crate::data::LabeledDataset;
use crate::error::Result;
use crate::seed;
use crate::svm::{self, SvmConfig};

fn deficit(d: &LabeledDataset) -> usize {
    d.majority_count() - d.minority_count()
}

/// Duplicates minority rows drawn uniformly with replacement.
pub fn random_oversample(d: &LabeledDataset, spec: &SamplerSpec) -> Result<Resampling> {
    let need = deficit(d);
    if need == 0 {
        return Ok(identity(d));
    }
    let minority = d.minority_indices();
    let mut rng = seed::rng(spec.seed);
    let origins = (0..need)
        .map(|_| {
            let i = minority[rng.random_range(0..minority.len())];
            Origin {
                base: i,
                toward: i,
                step: 0.0,
            }
        })
        .collect();
    materialize(d, origins)
}

/// Classic SMOTE: seeds cycle over the minority rows, each synthetic point is
/// a uniform interpolation toward one of the seed's `k` minority neighbors.
pub fn smote(d: &LabeledDataset, spec: &SamplerSpec) -> Result<Resampling> {
    let need = deficit(d);
    if need == 0 {
        return Ok(identity(d));
    }
    let mn = minority_neighbors(d, spec.k)?;
    let mut rng = seed::rng(spec.seed);
    let origins = (0..need)
        .map(|t| {
            let s = t % mn.indices.len();
            let nb = &mn.neighbors[s];
            Origin {
                base: mn.indices[s],
                toward: nb[rng.random_range(0..nb.len())],
                step: rng.random::<f64>(),
            }
        })
        .collect();
    materialize(d, origins)
}

/// Danger classification of one minority row from the number of majority
/// rows among its `k` full-data neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Safe,
    Danger,
    Noise,
}

pub fn classify_region(majority_neighbors: usize, k: usize) -> Region {
    if majority_neighbors == k {
        Region::Noise
    } else if 2 * majority_neighbors >= k {
        Region::Danger
    } else {
        Region::Safe
    }
}

/// Borderline-SMOTE. Only minority rows in danger seed new points. Variant 1
/// interpolates toward minority neighbors; variant 2 may also step toward a
/// majority neighbor, but at most halfway.
pub fn borderline_smote(d: &LabeledDataset, spec: &SamplerSpec, variant: u8) -> Result<Resampling> {
    assert!(
        variant == 1 || variant == 2,
        "borderline variant must be 1 or 2"
    );
    let need = deficit(d);
    if need == 0 {
        return Ok(identity(d));
    }
    let mn = minority_neighbors(d, spec.k)?;
    let (k_full, hoods) = full_neighborhoods(d, &mn.indices, spec.k)?;
    let mut danger = Vec::new();
    for (s, hood) in hoods.iter().enumerate() {
        let m = hood.iter().filter(|&&j| !d.is_minority(j)).count();
        if classify_region(m, k_full) == Region::Danger {
            danger.push(s);
        }
    }
    if danger.is_empty() {
        log::warn!("no minority sample is in danger; borderline SMOTE falls back to SMOTE");
        return smote(d, spec);
    }
    let mut rng = seed::rng(spec.seed);
    let origins = (0..need)
        .map(|t| {
            let s = danger[t % danger.len()];
            let mut candidates = mn.neighbors[s].clone();
            let n_minority = candidates.len();
            if variant == 2 {
                candidates.extend(hoods[s].iter().copied().filter(|&j| !d.is_minority(j)));
            }
            let c = rng.random_range(0..candidates.len());
            let step = if c < n_minority {
                rng.random::<f64>()
            } else {
                0.5 * rng.random::<f64>()
            };
            Origin {
                base: mn.indices[s],
                toward: candidates[c],
                step,
            }
        })
        .collect();
    materialize(d, origins)
}

/// ADASYN: minority rows with more majority neighbors receive
/// proportionally more synthetic points.
pub fn adasyn(d: &LabeledDataset, spec: &SamplerSpec) -> Result<Resampling> {
    let need = deficit(d);
    if need == 0 {
        return Ok(identity(d));
    }
    let mn = minority_neighbors(d, spec.k)?;
    let (k_full, hoods) = full_neighborhoods(d, &mn.indices, spec.k)?;
    let mut ratios: Vec<f64> = hoods
        .iter()
        .map(|h| h.iter().filter(|&&j| !d.is_minority(j)).count() as f64 / k_full as f64)
        .collect();
    if ratios.iter().sum::<f64>() == 0.0 {
        log::warn!("no minority sample has majority neighbors; ADASYN spreads samples uniformly");
        ratios.iter_mut().for_each(|r| *r = 1.0);
    }
    let counts = largest_remainder(&ratios, need);
    let mut rng = seed::rng(spec.seed);
    let mut origins = Vec::with_capacity(need);
    for (s, &g) in counts.iter().enumerate() {
        let nb = &mn.neighbors[s];
        for _ in 0..g {
            origins.push(Origin {
                base: mn.indices[s],
                toward: nb[rng.random_range(0..nb.len())],
                step: rng.random::<f64>(),
            });
        }
    }
    materialize(d, origins)
}

/// SVM-SMOTE: minority support vectors of an RBF SVM seed new points.
/// Support vectors whose neighborhood is majority-dominated interpolate
/// toward a minority neighbor; the rest extrapolate away from it by at most
/// half the neighbor distance.
pub fn svm_smote(d: &LabeledDataset, spec: &SamplerSpec) -> Result<Resampling> {
    let need = deficit(d);
    if need == 0 {
        return Ok(identity(d));
    }
    let mn = minority_neighbors(d, spec.k)?;
    let model = svm::train(
        d.features().view(),
        &d.signed_targets(),
        &SvmConfig::default(),
    )?;
    let seeds: Vec<usize> = mn
        .indices
        .iter()
        .enumerate()
        .filter(|(_, i)| model.support_indices.binary_search(i).is_ok())
        .map(|(s, _)| s)
        .collect();
    if seeds.is_empty() {
        log::warn!("no minority support vectors; SVM-SMOTE falls back to SMOTE");
        return smote(d, spec);
    }
    let queries: Vec<usize> = seeds.iter().map(|&s| mn.indices[s]).collect();
    let (k_full, hoods) = full_neighborhoods(d, &queries, spec.k)?;
    let dominated: Vec<bool> = hoods
        .iter()
        .map(|h| 2 * h.iter().filter(|&&j| !d.is_minority(j)).count() >= k_full)
        .collect();
    let mut rng = seed::rng(spec.seed);
    let origins = (0..need)
        .map(|t| {
            let which = t % seeds.len();
            let s = seeds[which];
            let nb = &mn.neighbors[s];
            let toward = nb[rng.random_range(0..nb.len())];
            let u = rng.random::<f64>();
            Origin {
                base: mn.indices[s],
                toward,
                step: if dominated[which] { u } else { -0.5 * u },
            }
        })
        .collect();
    materialize(d, origins)
}
