//! Integer apportionment of sample quotas.

/// Splits `total` proportionally to `weights` with the largest-remainder
/// rule; leftover units go to the largest fractional parts, ties to the lower
/// index. All-zero weights yield all zeros.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let mut out = vec![0usize; weights.len()];
    if !(sum > 0.0) || total == 0 {
        return out;
    }
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let quota = total as f64 * w / sum;
        let whole = (quota.floor() as usize).min(total - assigned);
        out[i] = whole;
        assigned += whole;
        if w > 0.0 {
            fractions.push((i, quota - quota.floor()));
        }
    }
    fractions.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut left = total - assigned;
    // rounding can leave more units than positive-weight slots; cycle
    while left > 0 {
        for &(i, _) in &fractions {
            if left == 0 {
                break;
            }
            out[i] += 1;
            left -= 1;
        }
    }
    out
}

/// Per-cluster sample counts summing to `total`. Zero-weight clusters get
/// nothing; when every weight is zero the total is spread evenly over the
/// clusters that hold at least one pool point (`cluster_sizes[i] > 0`).
pub fn allocate_counts(weights: &[f64], total: usize, cluster_sizes: &[usize]) -> Vec<usize> {
    debug_assert_eq!(weights.len(), cluster_sizes.len());
    if weights.iter().sum::<f64>() > 0.0 {
        return largest_remainder(weights, total);
    }
    log::warn!(
        "all cluster weights are zero; spreading {total} samples uniformly over non-empty clusters"
    );
    let mut eligible: Vec<f64> = cluster_sizes
        .iter()
        .map(|&s| if s > 0 { 1.0 } else { 0.0 })
        .collect();
    if eligible.iter().all(|&e| e == 0.0) {
        eligible.iter_mut().for_each(|e| *e = 1.0);
    }
    largest_remainder(&eligible, total)
}
