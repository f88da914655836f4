use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{ClassMetrics, ClassificationReport, Label};
use crate::stats::binomial_test;

fn rate_and_p(hits: usize, total: usize, chance: f64) -> Result<(f64, f64)> {
    if total == 0 {
        Ok((0.0, 1.0))
    } else {
        Ok((hits as f64 / total as f64, binomial_test(hits as u64, total as u64, chance)?))
    }
}

/// Confusion matrix and one-vs-rest metrics over the classes present in
/// either sequence. Every p-value is an exact upper-tail binomial test
/// against `chance`.
pub fn evaluate(predictions: &[Label], truth: &[Label], chance: f64) -> Result<ClassificationReport> {
    if predictions.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    if !(chance > 0.0 && chance < 1.0) {
        return Err(Error::invalid(format!("chance level {chance} must lie in (0, 1)")));
    }
    let classes: Vec<Label> = truth
        .iter()
        .chain(predictions)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |l: Label| classes.iter().position(|&c| c == l).unwrap_or(0);
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in predictions.iter().zip(truth) {
        confusion[idx(t)][idx(p)] += 1;
    }
    let n = truth.len();
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
            let fp = predicted - tp;
            let negatives = n - support;
            let tn = negatives - fp;
            let (sensitivity, sensitivity_p) = rate_and_p(tp, support, chance)?;
            let (specificity, specificity_p) = rate_and_p(tn, negatives, chance)?;
            Ok(ClassMetrics {
                class: classes[c],
                support,
                sensitivity,
                sensitivity_p,
                specificity,
                specificity_p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassificationReport {
        classes,
        confusion,
        per_class,
        accuracy: correct as f64 / n as f64,
        accuracy_p: binomial_test(correct as u64, n as u64, chance)?,
        n,
        chance,
    })
}
