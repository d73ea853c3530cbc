//! Synthetic two-dimensional "clover" data: a five-petal minority flower
//! inside a majority spread uniformly over the whole unit square, with an
//! optional share of minority points pushed into a thin band just outside
//! the petal edges.
//!
//! The majority also covers the flower, so minority points are outnumbered
//! at the scale of a default RBF kernel until the classes are rebalanced.
//!
//! This approximates the shape of the clover benchmark family; it is not a
//! reproduction of any published file.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

pub const CLOVER_PETALS: u32 = 5;
/// Petal tip distance from the flower center.
pub const CLOVER_RADIUS: f64 = 0.35;
/// Width of the borderline band outside the petal edge.
pub const CLOVER_BAND_WIDTH: f64 = 0.05;
const CENTER: (f64, f64) = (0.5, 0.5);

pub const MAJORITY_LABEL: &str = "negative";
pub const MINORITY_LABEL: &str = "positive";

/// Petal envelope radius in direction `theta`.
fn envelope(theta: f64) -> f64 {
    CLOVER_RADIUS * (f64::from(CLOVER_PETALS) * theta / 2.0).cos().abs()
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    let (dx, dy) = (x - CENTER.0, y - CENTER.1);
    (dx.hypot(dy), dy.atan2(dx))
}

/// Whether `(x, y)` falls inside the flower.
pub fn in_clover(x: f64, y: f64) -> bool {
    let (r, theta) = polar(x, y);
    r <= envelope(theta)
}

fn in_band(x: f64, y: f64) -> bool {
    let (r, theta) = polar(x, y);
    let e = envelope(theta);
    r > e && r <= e + CLOVER_BAND_WIDTH
}

fn sample_where<R: Rng>(
    rng: &mut R,
    lo: f64,
    hi: f64,
    accept: impl Fn(f64, f64) -> bool,
) -> (f64, f64) {
    loop {
        let x = rng.random_range(lo..hi);
        let y = rng.random_range(lo..hi);
        if accept(x, y) {
            return (x, y);
        }
    }
}

/// Majority rows come first, then minority rows. Each population and the
/// disturbance step draw from separate seeded streams, so changing
/// `disturbance_pct` moves exactly `round(minority_n * pct / 100)` minority
/// points and leaves everything else in place.
pub fn generate_clover(
    majority_n: usize,
    minority_n: usize,
    disturbance_pct: u32,
    seed: u64,
) -> Result<LabeledDataset> {
    if majority_n < 1 || minority_n < 1 {
        return Err(Error::invalid(
            "clover needs at least one sample of each class",
        ));
    }
    if disturbance_pct > 100 {
        return Err(Error::invalid(format!(
            "disturbance {disturbance_pct}% exceeds 100"
        )));
    }
    let box_lo = CENTER.0 - CLOVER_RADIUS - CLOVER_BAND_WIDTH;
    let box_hi = CENTER.0 + CLOVER_RADIUS + CLOVER_BAND_WIDTH;

    let mut maj_rng = seed::sub_rng(seed, 0);
    let majority: Vec<(f64, f64)> = (0..majority_n)
        .map(|_| sample_where(&mut maj_rng, 0.0, 1.0, |_, _| true))
        .collect();

    let mut min_rng = seed::sub_rng(seed, 1);
    let mut minority: Vec<(f64, f64)> = (0..minority_n)
        .map(|_| sample_where(&mut min_rng, box_lo, box_hi, in_clover))
        .collect();

    let moved = ((minority_n as u64 * u64::from(disturbance_pct) + 50) / 100) as usize;
    if moved > 0 {
        let mut dist_rng = seed::sub_rng(seed, 2);
        let mut order: Vec<usize> = (0..minority_n).collect();
        order.shuffle(&mut dist_rng);
        for &i in &order[..moved] {
            minority[i] = sample_where(&mut dist_rng, box_lo, box_hi, in_band);
        }
    }

    let n = majority_n + minority_n;
    let features = Array2::from_shape_fn((n, 2), |(i, j)| {
        let p = if i < majority_n {
            majority[i]
        } else {
            minority[i - majority_n]
        };
        if j == 0 {
            p.0
        } else {
            p.1
        }
    });
    let labels = (0..n)
        .map(|i| {
            if i < majority_n {
                MAJORITY_LABEL
            } else {
                MINORITY_LABEL
            }
            .to_string()
        })
        .collect();
    LabeledDataset::new(features, labels, Some(MINORITY_LABEL))?
        .with_feature_names(vec!["x".into(), "y".into()])
}
