use rand::seq::SliceRandom;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

/// Train/test index pairs for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// `(train, test)` per fold, each sorted ascending.
    pub assignments: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Stratified k-fold split. Each class is shuffled with `seed` and dealt
/// round-robin over the folds; the dealing position carries over from the
/// majority class into the minority class so fold sizes stay within one of
/// each other.
pub fn stratified_kfold(d: &LabeledDataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = seed::rng(seed);
    let mut fold_of = vec![0usize; d.n_samples()];
    let mut next = 0usize;
    for (name, mut members) in [
        (d.majority_label(), d.majority_indices()),
        (d.minority_label(), d.minority_indices()),
    ] {
        if members.len() < k {
            return Err(Error::invalid(format!(
                "class `{name}` has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    let assignments = (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..d.n_samples()).partition(|&i| fold_of[i] == f);
            (train, test)
        })
        .collect();
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}
