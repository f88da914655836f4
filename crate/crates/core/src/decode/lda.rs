use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Label;

/// Shrinkage values tried in order; the first whose covariance has
/// condition number below [`MAX_CONDITION`] is used.
pub const SHRINKAGE_GRID: [f64; 4] = [0.0, 0.01, 0.1, 0.5];
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// Class order used for tie-breaks.
    pub classes: Vec<Label>,
    pub means: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    pub shrinkage: f64,
    /// Row-major `p × p` pooled covariance after shrinkage.
    pub covariance: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub scores: Vec<f64>,
}

impl LdaModel {
    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Pooled-covariance LDA with diagonal shrinkage towards `tr(Σ)/p · I`.
pub fn lda_fit(features: &[Vec<f64>], labels: &[Label]) -> Result<LdaModel> {
    if features.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let p = features.first().map_or(0, Vec::len);
    if p == 0 {
        return Err(Error::invalid("no features"));
    }
    if features.iter().any(|r| r.len() != p) {
        return Err(Error::invalid("feature rows differ in length"));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let mut groups: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(Error::Insufficient("LDA needs at least 2 classes".into()));
    }
    if let Some((l, g)) = groups.iter().find(|(_, g)| g.len() < 2) {
        return Err(Error::Insufficient(format!("class {} has {} trials, needs 2", l.name(), g.len())));
    }
    let n = labels.len();
    let c = groups.len();
    let classes: Vec<Label> = groups.keys().copied().collect();
    let mut means = Vec::with_capacity(c);
    let mut scatter = DMatrix::<f64>::zeros(p, p);
    for rows in groups.values() {
        let mut mu = vec![0.0; p];
        for &i in rows {
            for (m, v) in mu.iter_mut().zip(&features[i]) {
                *m += v;
            }
        }
        mu.iter_mut().for_each(|m| *m /= rows.len() as f64);
        for &i in rows {
            let d = DVector::from_iterator(p, features[i].iter().zip(&mu).map(|(v, m)| v - m));
            scatter += &d * d.transpose();
        }
        means.push(mu);
    }
    if n <= c {
        return Err(Error::Insufficient("too few trials for pooled covariance".into()));
    }
    let sigma = scatter / (n - c) as f64;
    let target = sigma.trace() / p as f64;
    if !(target > 0.0) {
        return Err(Error::Degenerate("all features have zero within-class variance".into()));
    }
    let mut chosen = None;
    for &g in &SHRINKAGE_GRID {
        let s = &sigma * (1.0 - g) + DMatrix::identity(p, p) * (g * target);
        if condition(&s) < MAX_CONDITION {
            chosen = Some((g, s));
            break;
        }
    }
    let (shrinkage, cov) =
        chosen.ok_or_else(|| Error::Degenerate("covariance ill-conditioned at every shrinkage level".into()))?;
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate("shrunk covariance is not positive definite".into()))?;
    let priors: Vec<f64> = groups.values().map(|g| g.len() as f64 / n as f64).collect();
    let mut weights = Vec::with_capacity(c);
    let mut offsets = Vec::with_capacity(c);
    for (mu, prior) in means.iter().zip(&priors) {
        let m = DVector::from_column_slice(mu);
        let w = chol.solve(&m);
        offsets.push(-0.5 * m.dot(&w) + prior.ln());
        weights.push(w.iter().copied().collect());
    }
    Ok(LdaModel {
        classes,
        means,
        priors,
        shrinkage,
        covariance: cov.transpose().iter().copied().collect(),
        weights,
        offsets,
    })
}

/// Argmax of the discriminant scores; equal scores go to the earlier class.
pub fn lda_predict(model: &LdaModel, features: &[Vec<f64>]) -> Result<Vec<Prediction>> {
    features
        .iter()
        .map(|x| {
            if x.len() != model.dim() {
                return Err(Error::invalid(format!(
                    "feature dimension {} does not match model dimension {}",
                    x.len(),
                    model.dim()
                )));
            }
            let scores = model.scores(x);
            let mut best = 0;
            for (i, &s) in scores.iter().enumerate().skip(1) {
                if s > scores[best] {
                    best = i;
                }
            }
            Ok(Prediction {
                label: model.classes[best],
                scores,
            })
        })
        .collect()
}
