//! Full-covariance Gaussian mixtures fitted by expectation-maximization.
//!
//! Every M-step adds `reg_floor` to the covariance diagonal. Components whose
//! total responsibility collapses below [`EMPTY_COMPONENT_MASS`] are re-seeded
//! at the point the model explains worst, so the component count stays fixed.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, log_det_from_cholesky, log_sum_exp, lower_inverse, lower_sq_norm};
use crate::seed;

pub const EMPTY_COMPONENT_MASS: f64 = 1e-10;
const NEGLIGIBLE_LOG_RATIO: f64 = -37.0;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop once the log-likelihood improves by less than `tol` relative to
    /// its previous value.
    pub tol: f64,
    pub reg_floor: f64,
    pub n_init: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iters: 200,
            tol: 1e-6,
            reg_floor: 1e-6,
            n_init: 3,
            seed: 0,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.n_init == 0 || !(self.tol > 0.0) || !(self.reg_floor > 0.0) {
            return Err(Error::Config(format!(
                "EM settings must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    /// One mean per row.
    pub means: Array2<f64>,
    pub covariances: Vec<Array2<f64>>,
    pub converged: bool,
    pub final_log_likelihood: f64,
    /// Total log-likelihood after each E-step of the winning restart.
    pub log_likelihood_trace: Vec<f64>,
    /// Indices `t` into the trace where a component was re-seeded between
    /// entries `t` and `t + 1`; EM monotonicity does not hold across them.
    pub reseed_steps: Vec<usize>,
    /// Inverse Cholesky factor of each covariance.
    chol: Vec<Vec<f64>>,
    log_norm: Vec<f64>,
}

impl GmmModel {
    /// Assembles a model from explicit parameters (weights are normalized).
    pub fn from_parameters(
        weights: Vec<f64>,
        means: Array2<f64>,
        covariances: Vec<Array2<f64>>,
    ) -> Result<Self> {
        let c = weights.len();
        if c == 0 || means.nrows() != c || covariances.len() != c {
            return Err(Error::invalid(
                "weights, means and covariances disagree on component count",
            ));
        }
        let d = means.ncols();
        if covariances.iter().any(|s| s.dim() != (d, d)) {
            return Err(Error::invalid(
                "covariance shape does not match mean dimension",
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("mixing weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("mixing weights sum to zero"));
        }
        let mut model = GmmModel {
            weights: weights.iter().map(|w| w / total).collect(),
            means,
            covariances,
            converged: true,
            final_log_likelihood: f64::NAN,
            log_likelihood_trace: Vec::new(),
            reseed_steps: Vec::new(),
            chol: Vec::new(),
            log_norm: Vec::new(),
        };
        model.refresh_factors(0.0)?;
        Ok(model)
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    /// Recomputes Cholesky factors; `jitter` is added to the diagonal until
    /// factorization succeeds, growing tenfold per attempt.
    fn refresh_factors(&mut self, jitter: f64) -> Result<()> {
        let d = self.dim();
        self.chol.clear();
        self.log_norm.clear();
        for cov in &mut self.covariances {
            let mut extra = 0.0;
            let l = loop {
                let flat: Vec<f64> = cov.iter().copied().collect();
                if let Some(l) = cholesky(&flat, d) {
                    break l;
                }
                if jitter == 0.0 || extra > 1e6 {
                    return Err(Error::invalid("covariance is not positive definite"));
                }
                let bump = if extra == 0.0 { jitter } else { extra * 9.0 };
                for i in 0..d {
                    cov[[i, i]] += bump;
                }
                extra += bump;
            };
            self.log_norm
                .push(-0.5 * (d as f64 * LN_2PI + log_det_from_cholesky(&l, d)));
            self.chol.push(lower_inverse(&l, d));
        }
        Ok(())
    }

    /// `ln(pi_k) + ln N(x; mu_k, Sigma_k)` for every component.
    fn weighted_log_densities(&self, x: ArrayView1<f64>, out: &mut [f64], diff: &mut [f64]) {
        let d = self.dim();
        for (k, o) in out.iter_mut().enumerate().take(self.n_components()) {
            if self.weights[k] == 0.0 {
                *o = f64::NEG_INFINITY;
                continue;
            }
            for j in 0..d {
                diff[j] = x[j] - self.means[[k, j]];
            }
            let maha = lower_sq_norm(&self.chol[k], d, diff);
            *o = self.weights[k].ln() + self.log_norm[k] - 0.5 * maha;
        }
    }

    fn check_point(&self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query point"));
        }
        Ok(())
    }

    /// Posterior component probabilities for `x`, computed in log space.
    pub fn responsibilities(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let c = self.n_components();
        let d = self.dim();
        let mut lp = vec![0.0; c];
        self.weighted_log_densities(x, &mut lp, &mut vec![0.0; d]);
        let norm = log_sum_exp(&lp);
        Ok(lp.iter().map(|v| (v - norm).exp()).collect())
    }

    /// Most responsible component per row; ties go to the lower index.
    pub fn hard_assign(&self, points: ArrayView2<f64>) -> Result<Vec<usize>> {
        points
            .rows()
            .into_iter()
            .map(|x| {
                let r = self.responsibilities(x)?;
                Ok(argmax(&r))
            })
            .collect()
    }

    /// Total log-likelihood of `points`.
    pub fn log_likelihood(&self, points: ArrayView2<f64>) -> Result<f64> {
        let c = self.n_components();
        let d = self.dim();
        let (mut lp, mut diff) = (vec![0.0; c], vec![0.0; d]);
        let mut total = 0.0;
        for x in points.rows() {
            self.check_point(x)?;
            self.weighted_log_densities(x, &mut lp, &mut diff);
            total += log_sum_exp(&lp);
        }
        Ok(total)
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn data_covariance(points: ArrayView2<f64>) -> Array2<f64> {
    let n = points.nrows() as f64;
    let mean = points.sum_axis(Axis(0)) / n;
    let centered = &points - &mean;
    centered.t().dot(&centered) / n
}

/// k-means++ seeding: first center uniform, later ones with probability
/// proportional to squared distance from the nearest chosen center.
fn kmeanspp<R: Rng>(points: ArrayView2<f64>, c: usize, rng: &mut R) -> Array2<f64> {
    let n = points.nrows();
    let mut centers = Array2::zeros((c, points.ncols()));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let sq = |a: ArrayView1<f64>, b: ArrayView1<f64>| {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
    };
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq(p, points.row(first)))
        .collect();
    for k in 1..c {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(k).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq(p, points.row(pick)));
        }
    }
    centers
}

/// Fits a `c`-component mixture, keeping the best of `cfg.n_init` restarts.
pub fn fit(points: ArrayView2<f64>, c: usize, cfg: &EmConfig) -> Result<GmmModel> {
    cfg.validate()?;
    let n = points.nrows();
    if c == 0 {
        return Err(Error::invalid("component count must be at least 1"));
    }
    if c > n {
        return Err(Error::invalid(format!(
            "{c} components requested for {n} points"
        )));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mixture input"));
    }
    let fits: Vec<Result<GmmModel>> = (0..cfg.n_init)
        .into_par_iter()
        .map(|restart| fit_once(points, c, cfg, seed::sub_rng(cfg.seed, restart as u64)))
        .collect();
    let mut best: Option<GmmModel> = None;
    for f in fits {
        let f = f?;
        if best
            .as_ref()
            .is_none_or(|b| f.final_log_likelihood > b.final_log_likelihood)
        {
            best = Some(f);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

/// Like [`fit`] but clamps `c` to the number of points, logging a warning.
pub fn fit_clamped(points: ArrayView2<f64>, c: usize, cfg: &EmConfig) -> Result<GmmModel> {
    let n = points.nrows();
    let c = if c > n {
        log::warn!("clamping mixture components from {c} to {n} points");
        n
    } else {
        c
    };
    fit(points, c.max(1), cfg)
}

fn fit_once<R: Rng>(
    points: ArrayView2<f64>,
    c: usize,
    cfg: &EmConfig,
    mut rng: R,
) -> Result<GmmModel> {
    let (n, d) = points.dim();
    let mut base_cov = data_covariance(points);
    for i in 0..d {
        base_cov[[i, i]] += cfg.reg_floor;
    }
    let mut model = GmmModel {
        weights: vec![1.0 / c as f64; c],
        means: kmeanspp(points, c, &mut rng),
        covariances: vec![base_cov.clone(); c],
        converged: false,
        final_log_likelihood: f64::NEG_INFINITY,
        log_likelihood_trace: Vec::new(),
        reseed_steps: Vec::new(),
        chol: Vec::new(),
        log_norm: Vec::new(),
    };
    model.refresh_factors(cfg.reg_floor)?;

    let x = points.as_standard_layout();
    let x = x.as_slice().expect("standard layout");
    let mut resp = vec![0.0; n * c];
    let mut lp = vec![0.0; c];
    let mut diff = vec![0.0; d];
    let mut mass = vec![0.0; c];
    let mut sum_x = vec![0.0; c * d];
    let mut sum_xx = vec![0.0; c * d * d];

    for iter in 0..=cfg.max_iters {
        // E-step
        let means = model.means.as_slice().expect("standard layout").to_vec();
        let consts: Vec<f64> = (0..c)
            .map(|k| {
                if model.weights[k] > 0.0 {
                    model.weights[k].ln() + model.log_norm[k]
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let mut ll = 0.0;
        for i in 0..n {
            let xi = &x[i * d..(i + 1) * d];
            let mut max = f64::NEG_INFINITY;
            for k in 0..c {
                if consts[k] == f64::NEG_INFINITY {
                    lp[k] = f64::NEG_INFINITY;
                    continue;
                }
                let mu = &means[k * d..(k + 1) * d];
                for j in 0..d {
                    diff[j] = xi[j] - mu[j];
                }
                let v = consts[k] - 0.5 * lower_sq_norm(&model.chol[k], d, &diff);
                lp[k] = v;
                if v > max {
                    max = v;
                }
            }
            let row = &mut resp[i * c..(i + 1) * c];
            let mut total = 0.0;
            for k in 0..c {
                let t = lp[k] - max;
                // below half an ulp of the leading term; exp would only add noise
                let e = if t < NEGLIGIBLE_LOG_RATIO {
                    0.0
                } else {
                    t.exp()
                };
                row[k] = e;
                total += e;
            }
            let inv = 1.0 / total;
            row.iter_mut().for_each(|r| *r *= inv);
            ll += max + total.ln();
        }
        if let Some(&prev) = model.log_likelihood_trace.last() {
            if ll - prev < cfg.tol * f64::abs(prev).max(1.0) {
                model.converged = true;
            }
        }
        model.log_likelihood_trace.push(ll);
        model.final_log_likelihood = ll;
        if model.converged || iter == cfg.max_iters {
            break;
        }

        // M-step. Empty components are re-seeded first, then means and
        // covariances are accumulated in two passes over the points.
        mass.fill(0.0);
        for row in resp.chunks_exact(c) {
            for (m, r) in mass.iter_mut().zip(row) {
                *m += r;
            }
        }
        let mut reseed_at: Vec<Option<usize>> = vec![None; c];
        for k in 0..c {
            if mass[k] >= EMPTY_COMPONENT_MASS {
                continue;
            }
            let worst = (0..n)
                .filter(|i| !reseed_at.contains(&Some(*i)))
                .map(|i| {
                    (
                        i,
                        resp[i * c..(i + 1) * c].iter().copied().fold(0.0, f64::max),
                    )
                })
                .fold(
                    (0, f64::INFINITY),
                    |b, cur| if cur.1 < b.1 { cur } else { b },
                )
                .0;
            log::debug!("re-seeding empty mixture component {k} at point {worst}");
            // the reseeded point now belongs to k alone
            resp[worst * c..(worst + 1) * c].fill(0.0);
            resp[worst * c + k] = 1.0;
            reseed_at[k] = Some(worst);
        }
        mass.fill(0.0);
        sum_x.fill(0.0);
        sum_xx.fill(0.0);
        for i in 0..n {
            let xi = &x[i * d..(i + 1) * d];
            for (k, &r) in resp[i * c..(i + 1) * c].iter().enumerate() {
                if r == 0.0 || reseed_at[k].is_some() {
                    continue;
                }
                mass[k] += r;
                for (acc, v) in sum_x[k * d..(k + 1) * d].iter_mut().zip(xi) {
                    *acc += r * v;
                }
            }
        }
        for k in 0..c {
            if reseed_at[k].is_none() && mass[k] > 0.0 {
                sum_x[k * d..(k + 1) * d]
                    .iter_mut()
                    .for_each(|v| *v /= mass[k]);
            }
        }
        for i in 0..n {
            let xi = &x[i * d..(i + 1) * d];
            for (k, &r) in resp[i * c..(i + 1) * c].iter().enumerate() {
                if r == 0.0 || reseed_at[k].is_some() {
                    continue;
                }
                let mu = &sum_x[k * d..(k + 1) * d];
                for j in 0..d {
                    diff[j] = xi[j] - mu[j];
                }
                let acc = &mut sum_xx[k * d * d..(k + 1) * d * d];
                for a in 0..d {
                    let ra = r * diff[a];
                    for b in 0..=a {
                        acc[a * d + b] += ra * diff[b];
                    }
                }
            }
        }
        for k in 0..c {
            if let Some(worst) = reseed_at[k] {
                model.means.row_mut(k).assign(&points.row(worst));
                model.covariances[k] = base_cov.clone();
                model.weights[k] = 1.0 / n as f64;
                continue;
            }
            if mass[k] == 0.0 {
                model.weights[k] = 0.0;
                continue;
            }
            let acc = &sum_xx[k * d * d..(k + 1) * d * d];
            let cov = &mut model.covariances[k];
            for a in 0..d {
                for b in 0..=a {
                    let v = acc[a * d + b] / mass[k];
                    cov[[a, b]] = v;
                    cov[[b, a]] = v;
                }
                cov[[a, a]] += cfg.reg_floor;
            }
            model
                .means
                .row_mut(k)
                .assign(&ndarray::aview1(&sum_x[k * d..(k + 1) * d]));
            model.weights[k] = mass[k] / n as f64;
        }
        let total: f64 = model.weights.iter().sum();
        model.weights.iter_mut().for_each(|w| *w /= total);
        if reseed_at.iter().any(Option::is_some) {
            model
                .reseed_steps
                .push(model.log_likelihood_trace.len() - 1);
        }
        model.refresh_factors(cfg.reg_floor)?;
    }
    Ok(model)
}
