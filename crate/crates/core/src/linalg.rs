//! Small dense helpers for the mixture model. Matrices are row-major
//! `d x d` slices.

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not strictly positive.
pub fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix, itself lower triangular.
pub fn lower_inverse(l: &[f64], d: usize) -> Vec<f64> {
    let mut inv = vec![0.0; d * d];
    for col in 0..d {
        inv[col * d + col] = 1.0 / l[col * d + col];
        for i in col + 1..d {
            let mut s = 0.0;
            for k in col..i {
                s -= l[i * d + k] * inv[k * d + col];
            }
            inv[i * d + col] = s / l[i * d + i];
        }
    }
    inv
}

/// `|M v|^2` for lower-triangular `M`.
pub fn lower_sq_norm(m: &[f64], d: usize, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        let y: f64 = m[i * d..=i * d + i].iter().zip(v).map(|(a, b)| a * b).sum();
        acc += y * y;
    }
    acc
}

/// `log det A` from its Cholesky factor.
pub fn log_det_from_cholesky(l: &[f64], d: usize) -> f64 {
    (0..d).map(|i| l[i * d + i].ln()).sum::<f64>() * 2.0
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
