use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EpochSet, Label};

/// Chronological split: every `every_nth` trial (the 5th, 10th, … in time
/// order) is held out for testing.
pub fn chronological_holdout(epochs: &EpochSet, every_nth: usize) -> Result<(EpochSet, EpochSet)> {
    if every_nth < 2 {
        return Err(Error::invalid("holdout period must be at least 2"));
    }
    if epochs.n_trials() < every_nth {
        return Err(Error::Insufficient(format!(
            "{} trials cannot hold out every {every_nth}th",
            epochs.n_trials()
        )));
    }
    let sorted = epochs.sorted_chronologically();
    let (test, train): (Vec<usize>, Vec<usize>) = (0..sorted.n_trials()).partition(|i| i % every_nth == every_nth - 1);
    Ok((sorted.select(&train), sorted.select(&test)))
}

/// Holdout applied to each class's own time-ordered stream, then merged back
/// in time order, so both sides keep the class balance.
pub fn stratified_holdout(epochs: &EpochSet, every_nth: usize) -> Result<(EpochSet, EpochSet)> {
    let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in epochs.labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut train = None::<EpochSet>;
    let mut test = None::<EpochSet>;
    for idx in by_class.values() {
        let (tr, te) = chronological_holdout(&epochs.select(idx), every_nth)?;
        train = Some(match train {
            Some(t) => t.concat(&tr)?,
            None => tr,
        });
        test = Some(match test {
            Some(t) => t.concat(&te)?,
            None => te,
        });
    }
    match (train, test) {
        (Some(a), Some(b)) => Ok((a.sorted_chronologically(), b.sorted_chronologically())),
        _ => Err(Error::Insufficient("no trials to split".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldMode {
    #[default]
    Contiguous,
    Shuffled,
}

/// Test indices of each fold over `n` time-ordered trials.
pub fn fold_indices(n: usize, folds: usize, mode: FoldMode, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::invalid(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::Insufficient(format!("{n} trials for {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if mode == FoldMode::Shuffled {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    Ok((0..folds)
        .map(|f| {
            let mut fold = order[f * n / folds..(f + 1) * n / folds].to_vec();
            fold.sort_unstable();
            fold
        })
        .collect())
}
