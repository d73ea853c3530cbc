//! The adaptive mixture-based oversampler.
//!
//! A dense pool of interpolated minority points is clustered together with
//! the original minority rows. Clusters that explain many majority rows are
//! treated as overlap and starved; the rest supply the synthetic samples.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng;

use super::{
    allocate_counts, clamp_k, identity, largest_remainder, materialize, Origin, Resampling,
    SamplerSpec,
};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::gmm::{self, EmConfig, GmmModel};
use crate::neighbors::BallTree;
use crate::seed::{self, SeedMixer};

/// Candidate synthetic points. `parents[p] = (n, k, alpha)` means
/// `points[p] = m[n] + alpha * (m[k] - m[n])` for the minority matrix `m`
/// the pool was built from.
#[derive(Debug, Clone)]
pub struct SyntheticPool {
    pub points: Array2<f64>,
    pub parents: Vec<(usize, usize, f64)>,
    /// Mixture component of each point; empty until clustered.
    pub cluster_of: Vec<usize>,
}

impl SyntheticPool {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }
}

fn coordinate_key(row: ndarray::ArrayView1<f64>) -> Vec<u64> {
    // -0.0 and 0.0 are the same coordinate
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

/// For every minority row and each of its `k` nearest minority neighbors,
/// emits the `r` points at `alpha = j / r`, `j = 1..=r`. Exact duplicates keep
/// their first occurrence.
pub fn smote_grid_generate(minority: ArrayView2<f64>, k: usize, r: usize) -> Result<SyntheticPool> {
    let n = minority.nrows();
    if n < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 minority samples, found {n}"
        )));
    }
    if r == 0 {
        return Err(Error::Config("r must be at least 1".into()));
    }
    let k = clamp_k(k.max(1), n);
    let tree = BallTree::new(minority)?;
    let d = minority.ncols();
    let mut seen = HashSet::new();
    let mut flat = Vec::new();
    let mut parents = Vec::new();
    let mut row = vec![0.0; d];
    for s in 0..n {
        let a = minority.row(s);
        for nb in tree.knn(s, k)? {
            let b = minority.row(nb.index);
            for j in 1..=r {
                let alpha = j as f64 / r as f64;
                for (t, v) in row.iter_mut().enumerate() {
                    *v = a[t] + alpha * (b[t] - a[t]);
                }
                if seen.insert(coordinate_key(ndarray::aview1(&row))) {
                    flat.extend_from_slice(&row);
                    parents.push((s, nb.index, alpha));
                }
            }
        }
    }
    let points = Array2::from_shape_vec((parents.len(), d), flat).expect("row-major pool");
    Ok(SyntheticPool {
        points,
        parents,
        cluster_of: Vec::new(),
    })
}

/// Weight of a cluster that `q` of `m` majority rows are attributed to.
pub fn weight_rule(q: usize, m: usize, w_t: f64) -> f64 {
    let v = 1.0 - q as f64 / m as f64;
    if v > w_t {
        v
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterWeighting {
    /// Majority rows whose responsibility for the cluster exceeds `p_t`.
    pub q: Vec<usize>,
    pub w: Vec<f64>,
    /// Synthetic samples taken from each cluster. Filled in by the resampler.
    pub allocation: Vec<usize>,
}

pub fn cluster_weights(
    model: &GmmModel,
    majority: ArrayView2<f64>,
    p_t: f64,
    w_t: f64,
) -> Result<ClusterWeighting> {
    let c = model.n_components();
    let m = majority.nrows();
    if m == 0 {
        return Err(Error::invalid(
            "cluster weighting needs at least one majority row",
        ));
    }
    let mut q = vec![0usize; c];
    for x in majority.rows() {
        for (i, r) in model.responsibilities(x)?.into_iter().enumerate() {
            if r > p_t {
                q[i] += 1;
            }
        }
    }
    let w = q.iter().map(|&qi| weight_rule(qi, m, w_t)).collect();
    Ok(ClusterWeighting {
        q,
        w,
        allocation: vec![0; c],
    })
}

/// Everything the adaptive sampler computed on the way to its output.
#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub resampling: Resampling,
    pub pool: SyntheticPool,
    pub weighting: ClusterWeighting,
    pub model: GmmModel,
    /// Pool rows used, in output order. Repeats only occur when the pool is
    /// smaller than the class gap.
    pub selected: Vec<usize>,
}

/// Cluster quotas capped by cluster sizes, with shortfalls pushed to clusters
/// that still have room.
fn capped_allocation(weights: &[f64], total: usize, sizes: &[usize]) -> Vec<usize> {
    let mut want = allocate_counts(weights, total, sizes);
    let eligible: Vec<f64> = if weights.iter().sum::<f64>() > 0.0 {
        weights.to_vec()
    } else {
        sizes
            .iter()
            .map(|&s| if s > 0 { 1.0 } else { 0.0 })
            .collect()
    };
    let mut take: Vec<usize> = want.iter().zip(sizes).map(|(&a, &s)| a.min(s)).collect();
    loop {
        let short: usize = want.iter().zip(&take).map(|(a, t)| a - t).sum();
        if short == 0 {
            break;
        }
        let open: Vec<f64> = eligible
            .iter()
            .enumerate()
            .map(|(i, &e)| if take[i] < sizes[i] { e } else { 0.0 })
            .collect();
        if open.iter().all(|&e| e == 0.0) {
            break;
        }
        log::warn!("clusters too small for their quota; redistributing {short} samples");
        for (i, extra) in largest_remainder(&open, short).into_iter().enumerate() {
            want[i] = take[i] + extra;
            take[i] = want[i].min(sizes[i]);
        }
        for i in 0..want.len() {
            if open[i] == 0.0 {
                want[i] = take[i];
            }
        }
    }
    take
}

/// Runs the full adaptive pipeline and keeps the intermediate results.
pub fn adaptive_gmm_detailed(d: &LabeledDataset, spec: &SamplerSpec) -> Result<AdaptiveOutcome> {
    let min_idx = d.minority_indices();
    let n = min_idx.len();
    let m = d.majority_count();
    if n < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 minority samples, found {n}"
        )));
    }
    let minority = d.features().select(Axis(0), &min_idx);
    let first = minority.row(0);
    if minority.rows().into_iter().all(|row| row == first) {
        return Err(Error::invalid(
            "cannot synthesize from zero-variance minority class",
        ));
    }
    let mut pool = smote_grid_generate(minority.view(), spec.k, spec.r)?;
    let need = m - n;

    let fit_points =
        ndarray::concatenate(Axis(0), &[minority.view(), pool.points.view()]).expect("same width");
    let c = ((need as f64 * spec.eta).round() as usize).clamp(1, fit_points.nrows());
    let cfg = EmConfig {
        seed: SeedMixer::new(spec.seed).str("gmm").finish(),
        ..EmConfig::default()
    };
    let model = gmm::fit(fit_points.view(), c, &cfg)?;
    pool.cluster_of = model.hard_assign(pool.points.view())?;

    let majority = d.features().select(Axis(0), &d.majority_indices());
    let mut weighting = cluster_weights(&model, majority.view(), spec.p_t, spec.w_t)?;

    if need == 0 {
        return Ok(AdaptiveOutcome {
            resampling: identity(d),
            pool,
            weighting,
            model,
            selected: Vec::new(),
        });
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (p, &cl) in pool.cluster_of.iter().enumerate() {
        members[cl].push(p);
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let take = capped_allocation(&weighting.w, need, &sizes);

    let mut rng = seed::sub_rng(spec.seed, 1);
    let mut selected = Vec::with_capacity(need);
    for (cl, &t) in take.iter().enumerate() {
        for j in index::sample(&mut rng, sizes[cl], t) {
            selected.push(members[cl][j]);
        }
    }
    weighting.allocation = take;

    let leftover = need - selected.len();
    if leftover > 0 {
        let positive: Vec<usize> = (0..c).filter(|&i| weighting.w[i] > 0.0).collect();
        let clusters = if positive.iter().any(|&i| sizes[i] > 0) {
            positive
        } else {
            (0..c).collect()
        };
        let candidates: Vec<usize> = clusters
            .iter()
            .flat_map(|&i| members[i].iter().copied())
            .collect();
        log::warn!(
            "pool of {} usable points is smaller than the class gap; drawing {leftover} with replacement",
            candidates.len()
        );
        for _ in 0..leftover {
            let p = candidates[rng.random_range(0..candidates.len())];
            weighting.allocation[pool.cluster_of[p]] += 1;
            selected.push(p);
        }
    }

    let origins = selected
        .iter()
        .map(|&p| {
            let (s, k, alpha) = pool.parents[p];
            Origin {
                base: min_idx[s],
                toward: min_idx[k],
                step: alpha,
            }
        })
        .collect();
    Ok(AdaptiveOutcome {
        resampling: materialize(d, origins)?,
        pool,
        weighting,
        model,
        selected,
    })
}

pub fn adaptive_gmm_resample(d: &LabeledDataset, spec: &SamplerSpec) -> Result<LabeledDataset> {
    Ok(adaptive_gmm_detailed(d, spec)?.resampling.dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::SamplerKind;
    use ndarray::array;

    #[test]
    fn grid_midpoint_and_endpoint() {
        let m = array![[0.0, 0.0], [1.0, 1.0]];
        let pool = smote_grid_generate(m.view(), 1, 10).unwrap();
        let has = |x: f64, y: f64| {
            pool.points
                .rows()
                .into_iter()
                .any(|r| r[0] == x && r[1] == y)
        };
        assert!(has(0.5, 0.5));
        assert!(has(1.0, 1.0));
        assert!(has(0.0, 0.0));
    }

    #[test]
    fn grid_duplicates_removed() {
        // quarter steps are exact, so the reverse pair only adds (0, 0)
        let m = array![[0.0, 0.0], [1.0, 1.0]];
        let pool = smote_grid_generate(m.view(), 1, 4).unwrap();
        assert_eq!(pool.len(), 5);
        assert_eq!(pool.parents[4], (1, 0, 1.0));
    }

    #[test]
    fn grid_size_bound_and_geometry() {
        let m = array![[0.0, 0.0], [3.0, 1.0], [1.0, 4.0]];
        let pool = smote_grid_generate(m.view(), 2, 10).unwrap();
        assert!(pool.len() <= 60);
        for (p, &(a, b, alpha)) in pool.parents.iter().enumerate() {
            assert!(alpha > 0.0 && alpha <= 1.0);
            for t in 0..2 {
                let want = m[[a, t]] + alpha * (m[[b, t]] - m[[a, t]]);
                assert!((pool.points[[p, t]] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weight_rule_cases() {
        assert_eq!(weight_rule(0, 20, 0.5), 1.0);
        assert_eq!(weight_rule(20, 20, 0.5), 0.0);
        assert_eq!(weight_rule(12, 20, 0.5), 0.0);
        assert_eq!(weight_rule(10, 20, 0.5), 0.0);
        assert!((weight_rule(9, 20, 0.5) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn capped_allocation_redistributes() {
        assert_eq!(
            capped_allocation(&[1.0, 1.0, 0.0], 10, &[2, 20, 5]),
            vec![2, 8, 0]
        );
        assert_eq!(capped_allocation(&[1.0, 0.0], 10, &[4, 20]), vec![4, 0]);
        assert_eq!(capped_allocation(&[0.0, 0.0], 5, &[1, 9]), vec![1, 4]);
    }

    #[test]
    fn zero_variance_minority_is_rejected() {
        let x = array![[1.0, 1.0], [1.0, 1.0], [0.0, 0.0], [2.0, 0.0], [3.0, 0.0]];
        let labels = ["p", "p", "n", "n", "n"].map(String::from).to_vec();
        let d = LabeledDataset::new(x, labels, Some("p")).unwrap();
        let err =
            adaptive_gmm_resample(&d, &SamplerSpec::new(SamplerKind::AdaptiveGmm)).unwrap_err();
        assert!(err.to_string().contains("zero-variance"));
    }
}
