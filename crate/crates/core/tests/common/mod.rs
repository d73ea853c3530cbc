//! Helpers shared by the integration tests: fixture generators and
//! independent reference implementations.
#![allow(dead_code)]

use adaptive_oversampling::LabeledDataset;
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Labels rows `0..n_min` as minority "pos", the rest "neg".
pub fn labeled(x: Array2<f64>, n_min: usize) -> LabeledDataset {
    let labels = (0..x.nrows())
        .map(|i| if i < n_min { "pos" } else { "neg" }.to_string())
        .collect();
    LabeledDataset::new(x, labels, Some("pos")).unwrap()
}

/// Gaussian classes with shifted means; `2 <= n_min < n_maj`.
pub fn random_fixture(seed: u64, n_min: usize, n_maj: usize, dim: usize) -> LabeledDataset {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x = Array2::from_shape_fn((n_min + n_maj, dim), |(i, _)| {
        let shift = if i < n_min { 1.0 } else { 0.0 };
        normal.sample(&mut r) + shift
    });
    labeled(x, n_min)
}

/// Random imbalanced fixture with sizes drawn from the acceptance ranges.
pub fn random_sized_fixture(seed: u64) -> LabeledDataset {
    let mut r = rng(seed ^ 0xa5a5);
    let n_maj = r.random_range(3..=300);
    let n_min = r.random_range(2..n_maj.clamp(3, 150));
    let dim = r.random_range(2..=15);
    random_fixture(seed, n_min, n_maj, dim)
}

/// Indices of the `k` nearest rows to row `q` (excluding `q`), ties by index.
pub fn brute_knn(x: ArrayView2<f64>, q: usize, k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..x.nrows())
        .filter(|&i| i != q)
        .map(|i| {
            let d: f64 = x
                .row(i)
                .iter()
                .zip(x.row(q))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (i, d.sqrt())
        })
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Maximum of the SVM dual `sum(a) - a^T Q a / 2` over `0 <= a <= c`,
/// `y^T a = 0`, found by enumerating which variables sit at 0, at `c`, or
/// strictly between, and solving the stationarity system on the free set.
/// Exponential in `n`; meant for a handful of points.
pub fn brute_force_dual(q: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let mut best = f64::NEG_INFINITY;
    let mut states = vec![0u8; n];
    let objective = |a: &[f64]| {
        let mut v: f64 = a.iter().sum();
        for i in 0..n {
            for j in 0..n {
                v -= 0.5 * a[i] * a[j] * q[i][j];
            }
        }
        v
    };
    for code in 0..3usize.pow(n as u32) {
        let mut t = code;
        for s in states.iter_mut() {
            *s = (t % 3) as u8;
            t /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| states[i] == 2).collect();
        let mut a: Vec<f64> = states
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();
        if free.is_empty() {
            let eq: f64 = a.iter().zip(y).map(|(a, y)| a * y).sum();
            if eq.abs() < 1e-12 {
                best = best.max(objective(&a));
            }
            continue;
        }
        let m = free.len();
        let mut mat = vec![vec![0.0; m + 1]; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                mat[r][s] = q[i][j];
            }
            mat[r][m] = y[i];
            let fixed: f64 = (0..n)
                .filter(|j| states[*j] != 2)
                .map(|j| q[i][j] * a[j])
                .sum();
            rhs[r] = 1.0 - fixed;
            mat[m][r] = y[i];
        }
        rhs[m] = -(0..n)
            .filter(|j| states[*j] != 2)
            .map(|j| y[j] * a[j])
            .sum::<f64>();
        let Some(sol) = solve(mat, rhs) else { continue };
        if sol[..m].iter().all(|&v| v > -1e-12 && v < c + 1e-12) {
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r].clamp(0.0, c);
            }
            best = best.max(objective(&a));
        }
    }
    best
}

/// Every component of `m` carries more than `2 d` points' worth of mass.
#[allow(dead_code)]
pub fn well_posed(m: &adaptive_oversampling::gmm::GmmModel, n: usize, d: usize) -> bool {
    m.weights.iter().all(|w| w * n as f64 > 2.0 * d as f64)
}
