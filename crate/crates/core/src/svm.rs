//! Soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization.
//!
//! The working pair is chosen by the maximal-violation / second-order rule
//! with every tie resolved toward the lower index, so training is a pure
//! function of its inputs. Kernel rows are cached in an LRU bounded by
//! [`KERNEL_CACHE_BYTES`].

use std::rc::Rc;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

pub const KERNEL_CACHE_BYTES: usize = 64 << 20;
const TAU: f64 = 1e-12;

/// RBF width `gamma` in `exp(-gamma * |a - b|^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (n_features * var(X))`, variance taken over every matrix entry.
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    /// Box constraint on the dual variables.
    pub c_reg: f64,
    pub gamma: Gamma,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c_reg: 1.0,
            gamma: Gamma::Scale,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    pub support_vectors: Array2<f64>,
    /// Training-set row of each support vector.
    pub support_indices: Vec<usize>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c_reg: f64,
    /// Dual objective `sum(alpha) - 1/2 alpha^T Q alpha` at the solution.
    pub dual_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn rbf(a: ArrayView1<f64>, b: ArrayView1<f64>, gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn scale_gamma(x: ArrayView2<f64>) -> f64 {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0
    }
}

struct KernelCache<'a> {
    x: ArrayView2<'a, f64>,
    gamma: f64,
    rows: Vec<Option<Rc<Vec<f64>>>>,
    stamp: Vec<u64>,
    clock: u64,
    cached: Vec<usize>,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(x: ArrayView2<'a, f64>, gamma: f64, bytes: usize) -> Self {
        let n = x.nrows();
        KernelCache {
            x,
            gamma,
            rows: vec![None; n],
            stamp: vec![0; n],
            clock: 0,
            cached: Vec::new(),
            capacity: (bytes / (8 * n.max(1))).max(2),
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        self.clock += 1;
        self.stamp[i] = self.clock;
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.cached.len() >= self.capacity {
            let (pos, &victim) = self
                .cached
                .iter()
                .enumerate()
                .min_by_key(|(_, &r)| self.stamp[r])
                .expect("non-empty cache");
            self.rows[victim] = None;
            self.cached.swap_remove(pos);
        }
        let xi = self.x.row(i);
        let row: Vec<f64> = self
            .x
            .rows()
            .into_iter()
            .map(|xj| rbf(xi, xj, self.gamma))
            .collect();
        let row = Rc::new(row);
        self.rows[i] = Some(Rc::clone(&row));
        self.cached.push(i);
        row
    }
}

/// Trains on rows of `x` with labels in {-1, +1}.
pub fn train(x: ArrayView2<f64>, y: &[f64], cfg: &SvmConfig) -> Result<SvmModel> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::invalid("SVM training needs at least 2 samples"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("SVM labels must be -1 or +1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::invalid("SVM training needs both classes"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVM features"));
    }
    if !(cfg.c_reg > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::Config("SVM c_reg and tol must be positive".into()));
    }
    let gamma = match cfg.gamma {
        Gamma::Scale => scale_gamma(x),
        Gamma::Value(g) if g > 0.0 => g,
        Gamma::Value(g) => return Err(Error::Config(format!("gamma must be positive, got {g}"))),
    };
    let c = cfg.c_reg;
    let mut cache = KernelCache::new(x, gamma, KERNEL_CACHE_BYTES);
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a^T Q a - e^T a
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        let ki = if i == usize::MAX {
            None
        } else {
            Some(cache.row(i))
        };
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            gmax2 = gmax2.max(y[t] * grad[t]);
            if let Some(ki) = &ki {
                let b = gmax + y[t] * grad[t];
                if b > 0.0 {
                    let a = (2.0 - 2.0 * ki[t]).max(TAU);
                    let score = -(b * b) / a;
                    if score < best {
                        best = score;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < cfg.tol || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;
        let ki = ki.expect("i selected");
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = ki[j];
        if y[i] != y[j] {
            let quad = (2.0 - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }
    if !converged {
        log::warn!(
            "SMO stopped after {iterations} iterations without reaching tol {}",
            cfg.tol
        );
    }

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    let dual_objective = -0.5
        * alpha
            .iter()
            .zip(&grad)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>();

    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        support_vectors: x.select(Axis(0), &support_indices),
        dual_coefficients: support_indices.iter().map(|&t| alpha[t] * y[t]).collect(),
        support_indices,
        bias: -rho,
        gamma,
        c_reg: c,
        dual_objective,
        iterations,
        converged,
    })
}

impl SvmModel {
    fn check_dim(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.support_vectors.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.support_vectors.ncols(),
                got: x.ncols(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SVM query"));
        }
        Ok(())
    }

    pub fn decision_function(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(x.rows()
            .into_iter()
            .map(|row| {
                self.support_vectors
                    .rows()
                    .into_iter()
                    .zip(&self.dual_coefficients)
                    .map(|(sv, coef)| coef * rbf(sv, row, self.gamma))
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    /// `sign(margin)` with zero mapped to +1.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|m| if m >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_points_split_at_zero() {
        let x = array![[-1.0], [1.0]];
        let y = [-1.0, 1.0];
        let m = train(
            x.view(),
            &y,
            &SvmConfig {
                gamma: Gamma::Value(10.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), vec![-1.0, 1.0]);
        let at_zero = m.decision_function(array![[0.0]].view()).unwrap()[0];
        assert!(at_zero.abs() < 1e-9);
    }

    #[test]
    fn separable_cloud_fits_exactly() {
        let x = Array2::from_shape_fn((20, 2), |(i, j)| {
            let base = if i < 10 { -2.0 } else { 2.0 };
            base + 0.1 * (i % 10) as f64 * if j == 0 { 1.0 } else { -1.0 }
        });
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { -1.0 } else { 1.0 }).collect();
        let m = train(x.view(), &y, &SvmConfig::default()).unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), y);
        let s: f64 = m.dual_coefficients.iter().sum();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let x = array![[0.0], [1.0]];
        assert!(train(x.view(), &[1.0, 1.0], &SvmConfig::default()).is_err());
        assert!(train(x.view(), &[1.0, 0.0], &SvmConfig::default()).is_err());
        assert!(train(x.view(), &[1.0], &SvmConfig::default()).is_err());
        let bad = array![[0.0], [f64::NAN]];
        assert!(train(bad.view(), &[1.0, -1.0], &SvmConfig::default()).is_err());
        let m = train(x.view(), &[1.0, -1.0], &SvmConfig::default()).unwrap();
        assert!(m.decision_function(array![[0.0, 1.0]].view()).is_err());
    }

    #[test]
    fn scale_gamma_matches_definition() {
        let x = array![[0.0, 2.0], [4.0, 2.0]];
        // entries 0,2,4,2: mean 2, variance 2
        assert!((scale_gamma(x.view()) - 0.25).abs() < 1e-15);
        assert_eq!(scale_gamma(array![[1.0, 1.0]].view()), 1.0);
    }

    #[test]
    fn tiny_cache_gives_same_model() {
        let x = Array2::from_shape_fn((30, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 3.0);
        let y: Vec<f64> = (0..30)
            .map(|i| if (i * 7) % 11 > 5 { 1.0 } else { -1.0 })
            .collect();
        let cfg = SvmConfig::default();
        let full = train(x.view(), &y, &cfg).unwrap();
        let gamma = scale_gamma(x.view());
        let mut small = KernelCache::new(x.view(), gamma, 8 * 30 * 2);
        let mut big = KernelCache::new(x.view(), gamma, KERNEL_CACHE_BYTES);
        for i in [0, 5, 3, 0, 29, 5, 7] {
            assert_eq!(small.row(i), big.row(i));
        }
        assert!(small.cached.len() <= 2);
        assert!(full.converged);
    }
}
