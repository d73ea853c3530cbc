mod common;

use adaptive_oversampling::gmm::GmmModel;
use adaptive_oversampling::samplers::{
    adaptive_gmm_detailed, allocate_counts, cluster_weights, resample, smote_grid_generate,
    weight_rule, Resampling, SamplerKind, SamplerSpec,
};
use adaptive_oversampling::LabeledDataset;
use common::{labeled, random_fixture, rng};
use ndarray::{array, s, Array2};
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

fn check_contract(d: &LabeledDataset, out: &Resampling) {
    let o = &out.dataset;
    assert_eq!(o.minority_count(), o.majority_count());
    assert_eq!(o.minority_label(), d.minority_label());
    let n = d.n_samples();
    assert_eq!(o.features().slice(s![..n, ..]), d.features());
    assert_eq!(&o.labels()[..n], d.labels());
    assert!(o.labels()[n..].iter().all(|l| l == d.minority_label()));
    assert_eq!(out.origins.len(), o.n_samples() - n);
}

fn check_segments(d: &LabeledDataset, out: &Resampling) {
    let x = d.features();
    let n = d.n_samples();
    for (t, o) in out.origins.iter().enumerate() {
        assert!((0.0..=1.0).contains(&o.step), "step {}", o.step);
        for j in 0..d.n_features() {
            let a = x[[o.base, j]];
            let b = x[[o.toward, j]];
            let p = out.dataset.features()[[n + t, j]];
            assert!((p - (a + o.step * (b - a))).abs() <= 1e-9);
            assert!(p >= a.min(b) - 1e-9 && p <= a.max(b) + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_sampler_balances_and_preserves(
        seed in 0u64..10_000,
        n_min in 2usize..12,
        extra in 1usize..40,
        dim in 1usize..5,
        k in 1usize..6,
    ) {
        let d = random_fixture(seed, n_min, n_min + extra, dim);
        for kind in SamplerKind::ALL {
            let spec = SamplerSpec { kind, k, seed, eta: 0.2, ..SamplerSpec::default() };
            let out = resample(&d, &spec).unwrap();
            if kind == SamplerKind::None {
                prop_assert_eq!(&out.dataset, &d);
                continue;
            }
            check_contract(&d, &out);
            let again = resample(&d, &spec).unwrap();
            prop_assert_eq!(&out.dataset, &again.dataset);
            if matches!(kind, SamplerKind::Smote | SamplerKind::BorderlineSmote1 | SamplerKind::Adasyn | SamplerKind::AdaptiveGmm) {
                check_segments(&d, &out);
                for o in &out.origins {
                    prop_assert!(d.is_minority(o.base) && d.is_minority(o.toward));
                }
            }
        }
    }

    #[test]
    fn allocation_sums_to_total(
        w in proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 1..12),
        total in 0usize..500,
    ) {
        let sizes = vec![3usize; w.len()];
        let a = allocate_counts(&w, total, &sizes);
        prop_assert_eq!(a.iter().sum::<usize>(), total);
        if w.iter().sum::<f64>() > 0.0 {
            for (ai, wi) in a.iter().zip(&w) {
                if *wi == 0.0 {
                    prop_assert_eq!(*ai, 0);
                }
            }
        }
    }
}

#[test]
fn smote_points_stay_in_minority_box() {
    let d = random_fixture(9, 15, 90, 3);
    let out = resample(
        &d,
        &SamplerSpec {
            kind: SamplerKind::Smote,
            seed: 3,
            ..SamplerSpec::default()
        },
    )
    .unwrap();
    let mins = d.minority_indices();
    for j in 0..3 {
        let lo = mins
            .iter()
            .map(|&i| d.features()[[i, j]])
            .fold(f64::INFINITY, f64::min);
        let hi = mins
            .iter()
            .map(|&i| d.features()[[i, j]])
            .fold(f64::NEG_INFINITY, f64::max);
        for r in d.n_samples()..out.dataset.n_samples() {
            let v = out.dataset.features()[[r, j]];
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}

#[test]
fn ros_on_pima_sized_data_doubles_majority() {
    let d = random_fixture(1, 268, 500, 8);
    let out = resample(&d, &SamplerSpec::new(SamplerKind::Ros)).unwrap();
    assert_eq!(out.dataset.n_samples(), 1000);
    for r in 768..1000 {
        let row = out.dataset.features().row(r);
        assert!((0..268).any(|i| d.features().row(i) == row));
    }
}

#[test]
fn grid_pool_endpoint_and_bound() {
    let m = array![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];
    let pool = smote_grid_generate(m.view(), 2, 10).unwrap();
    assert!(pool.len() <= 60);
    // every minority point is the j = r endpoint of some pair, and appears once
    for row in m.rows() {
        let hits = pool.points.rows().into_iter().filter(|p| *p == row).count();
        assert_eq!(hits, 1);
    }
    let mid = pool
        .points
        .rows()
        .into_iter()
        .any(|p| p[0] == 1.0 && p[1] == 0.0);
    assert!(mid);
}

#[test]
fn weight_rule_exhaustive() {
    let m = 20;
    for w_t in [0.0, 0.25, 0.5, 0.9] {
        for q in 0..=m {
            let v = 1.0 - q as f64 / m as f64;
            let w = weight_rule(q, m, w_t);
            if v > w_t {
                assert_eq!(w, v);
            } else {
                assert_eq!(w, 0.0);
            }
        }
    }
}

#[test]
fn cluster_weights_count_confident_majority() {
    let model = GmmModel::from_parameters(
        vec![0.5, 0.5],
        array![[0.0, 0.0], [10.0, 0.0]],
        vec![Array2::eye(2), Array2::eye(2)],
    )
    .unwrap();
    // 3 rows near the first mean, one near the second, one on the midpoint
    let majority = array![[0.1, 0.0], [-0.2, 0.3], [0.0, -1.0], [9.0, 0.0], [5.0, 0.0]];
    let cw = cluster_weights(&model, majority.view(), 0.5, 0.5).unwrap();
    assert_eq!(cw.q, vec![3, 1]);
    assert_eq!(cw.w, vec![0.0, 0.8]);
}

/// Majority around the origin hides one minority blob; the other minority
/// blob sits far away on its own.
fn containment_fixture(seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let wide = Normal::new(0.0, 1.0).unwrap();
    let tight = Normal::new(0.0, 0.3).unwrap();
    let n_min = 40;
    let n_maj = 100;
    let x = Array2::from_shape_fn((n_min + n_maj, 2), |(i, _)| {
        if i < n_min / 2 {
            tight.sample(&mut r)
        } else if i < n_min {
            10.0 + tight.sample(&mut r)
        } else {
            wide.sample(&mut r)
        }
    });
    labeled(x, n_min)
}

#[test]
fn noise_cluster_is_never_sampled() {
    let d = containment_fixture(5);
    let spec = SamplerSpec {
        kind: SamplerKind::AdaptiveGmm,
        k: 5,
        eta: 2.0 / 60.0,
        seed: 5,
        ..SamplerSpec::default()
    };
    let out = adaptive_gmm_detailed(&d, &spec).unwrap();
    assert_eq!(out.model.n_components(), 2);
    let n = d.n_samples();
    for r in n..out.resampling.dataset.n_samples() {
        assert!(out.resampling.dataset.features()[[r, 0]] > 5.0);
    }
    let sum: usize = out.weighting.allocation.iter().sum();
    assert_eq!(sum, 60);
    assert!(out.weighting.w.contains(&0.0));
}
