mod common;

use adaptive_oversampling::gmm::{self, EmConfig};
use adaptive_oversampling::neighbors::BallTree;
use adaptive_oversampling::svm::{self, rbf, Gamma, SvmConfig};
use common::{brute_force_dual, brute_knn, rng};
use ndarray::{array, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn ball_tree_matches_brute_force() {
    let mut r = rng(1);
    for case in 0..1000 {
        let n = r.random_range(2..80);
        let d = r.random_range(1..6);
        // a coarse grid produces plenty of exact distance ties
        let coarse = case % 3 == 0;
        let x = Array2::from_shape_fn((n, d), |_| {
            if coarse {
                f64::from(r.random_range(0..4u8))
            } else {
                r.random_range(-5.0..5.0)
            }
        });
        let leaf = r.random_range(1..20);
        let tree = BallTree::with_leaf_size(x.view(), leaf).unwrap();
        let q = r.random_range(0..n);
        let k = r.random_range(1..n);
        let got: Vec<(usize, f64)> = tree
            .knn(q, k)
            .unwrap()
            .into_iter()
            .map(|nb| (nb.index, nb.distance))
            .collect();
        let want = brute_knn(x.view(), q, k);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.0, w.0, "case {case}: {got:?} vs {want:?}");
            assert!((g.1 - w.1).abs() < 1e-12);
        }
    }
}

fn kernel_matrix(x: &Array2<f64>, y: &[f64], gamma: f64) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|i| {
            (0..x.nrows())
                .map(|j| y[i] * y[j] * rbf(x.row(i), x.row(j), gamma))
                .collect()
        })
        .collect()
}

#[test]
fn smo_reaches_brute_force_dual_optimum() {
    let mut r = rng(2);
    let normal = Normal::new(0.0, 1.0).unwrap();
    for case in 0..40 {
        let x = Array2::from_shape_fn((6, 2), |_| normal.sample(&mut r));
        let mut y = vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        if case % 4 == 1 {
            y = vec![1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        }
        let c_reg = [0.5, 1.0, 10.0][case % 3];
        let cfg = SvmConfig {
            c_reg,
            gamma: Gamma::Value(0.7),
            ..SvmConfig::default()
        };
        let model = svm::train(x.view(), &y, &cfg).unwrap();
        let oracle = brute_force_dual(&kernel_matrix(&x, &y, 0.7), &y, c_reg);
        assert!(
            (model.dual_objective - oracle).abs() < 1e-4,
            "case {case}: smo {} vs oracle {oracle}",
            model.dual_objective
        );
    }
}

#[test]
fn smo_solution_is_feasible_and_kkt() {
    let mut r = rng(3);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x = Array2::from_shape_fn((60, 3), |(i, _)| {
        normal.sample(&mut r) + if i < 20 { 1.0 } else { 0.0 }
    });
    let y: Vec<f64> = (0..60).map(|i| if i < 20 { 1.0 } else { -1.0 }).collect();
    let cfg = SvmConfig::default();
    let model = svm::train(x.view(), &y, &cfg).unwrap();
    assert!(model.converged);
    let mut alpha = vec![0.0; 60];
    for (&i, &coef) in model.support_indices.iter().zip(&model.dual_coefficients) {
        alpha[i] = coef * y[i];
    }
    let eq: f64 = alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
    assert!(eq.abs() < 1e-9);
    assert!(alpha
        .iter()
        .all(|&a| (-1e-12..=cfg.c_reg + 1e-12).contains(&a)));

    let f = model.decision_function(x.view()).unwrap();
    for i in 0..60 {
        let margin = y[i] * f[i];
        if alpha[i] < 1e-8 {
            assert!(margin >= 1.0 - 2e-3, "row {i} margin {margin}");
        } else if alpha[i] > cfg.c_reg - 1e-8 {
            assert!(margin <= 1.0 + 2e-3, "row {i} margin {margin}");
        } else {
            assert!((margin - 1.0).abs() < 2e-3, "row {i} margin {margin}");
        }
    }
}

#[test]
fn em_log_likelihood_never_drops() {
    let mut r = rng(4);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut checked = 0;
    for case in 0..30 {
        let n = r.random_range(10..200);
        let d = r.random_range(1..5);
        let x = Array2::from_shape_fn((n, d), |(i, _)| {
            normal.sample(&mut r) + (i % 3) as f64 * 3.0
        });
        let c = r.random_range(1..8.min(n));
        let cfg = EmConfig {
            seed: case,
            ..EmConfig::default()
        };
        let m = gmm::fit(x.view(), c, &cfg).unwrap();
        // a component squeezed onto <= d points is held up by the covariance
        // floor, and the floored M-step is no longer an exact maximizer
        if !common::well_posed(&m, n, d) {
            continue;
        }
        checked += 1;
        for (t, w) in m.log_likelihood_trace.windows(2).enumerate() {
            if m.reseed_steps.contains(&t) {
                continue;
            }
            assert!(
                w[1] - w[0] >= -1e-8,
                "case {case} step {t}: {} -> {}",
                w[0],
                w[1]
            );
        }
    }
    assert!(checked >= 20, "only {checked} well-posed fits");
}

#[test]
fn em_handles_duplicate_heavy_data() {
    let x = array![
        [0.0, 0.0],
        [0.0, 0.0],
        [0.0, 0.0],
        [1.0, 1.0],
        [1.0, 1.0],
        [5.0, 5.0]
    ];
    let m = gmm::fit(x.view(), 3, &EmConfig::default()).unwrap();
    assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    for r in x.rows() {
        let p = m.responsibilities(r).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
