use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeatureCoord, FeatureTensor, Label};
use crate::stats::special::digamma;

pub const DEFAULT_K: usize = 3;
const JITTER: f64 = 1e-10;

/// Ranks after breaking exact ties with seeded jitter; `None` for a constant
/// feature.
fn ranks(feature: &[f64], seed: u64) -> Option<Vec<usize>> {
    let n = feature.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| feature[a].total_cmp(&feature[b]));
    if feature[order[0]] == feature[order[n - 1]] {
        return None;
    }
    let tied = order.windows(2).any(|w| feature[w[0]] == feature[w[1]]);
    if tied {
        let scale = feature.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jittered: Vec<f64> = feature
            .iter()
            .map(|v| v + JITTER * scale * (rng.random::<f64>() - 0.5))
            .collect();
        order.sort_by(|&a, &b| jittered[a].total_cmp(&jittered[b]).then(a.cmp(&b)));
    }
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    Some(rank)
}

/// Ross k-nearest-neighbour MI (nats) between a continuous feature and a
/// discrete label, computed on the feature's ranks. The raw estimate can be
/// slightly negative.
pub fn mi_discrete_continuous(feature: &[f64], labels: &[Label], k: usize, seed: u64) -> Result<f64> {
    let n = feature.len();
    if labels.len() != n {
        return Err(Error::invalid(format!("{n} feature values but {} labels", labels.len())));
    }
    if n < 10 {
        return Err(Error::Insufficient(format!("MI needs at least 10 samples, got {n}")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if feature.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let mut classes: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    if let Some((l, m)) = classes.iter().find(|(_, m)| m.len() <= k) {
        return Err(Error::Insufficient(format!(
            "class {} has {} members, needs more than k = {k}",
            l.name(),
            m.len()
        )));
    }
    let Some(rank) = ranks(feature, seed) else {
        return Ok(0.0);
    };

    // Each rank gets a seeded offset in (−½, ½) so distances stay continuous
    // while depending on ranks alone.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let vals: Vec<f64> = (0..n).map(|r| r as f64 + rng.random::<f64>() - 0.5).collect();

    let mut psi_m = 0.0;
    let mut psi_class = 0.0;
    for members in classes.values() {
        let mut pos: Vec<f64> = members.iter().map(|&i| vals[rank[i]]).collect();
        pos.sort_by(f64::total_cmp);
        let nc = pos.len();
        psi_class += nc as f64 * digamma(nc as f64);
        for (j, &p) in pos.iter().enumerate() {
            // Merge outward k steps through the class's sorted positions.
            let (mut lo, mut hi) = (j, j);
            let mut d = 0.0;
            for _ in 0..k {
                let left = (lo > 0).then(|| p - pos[lo - 1]);
                let right = (hi + 1 < nc).then(|| pos[hi + 1] - p);
                match (left, right) {
                    (Some(l), Some(r)) if l <= r => {
                        d = l;
                        lo -= 1;
                    }
                    (_, Some(r)) => {
                        d = r;
                        hi += 1;
                    }
                    (Some(l), None) => {
                        d = l;
                        lo -= 1;
                    }
                    (None, None) => unreachable!("class larger than k"),
                }
            }
            let first = vals.partition_point(|&v| v <= p - d);
            let last = vals.partition_point(|&v| v < p + d);
            psi_m += digamma((last - first) as f64);
        }
    }
    let nf = n as f64;
    Ok(digamma(nf) - psi_class / nf + digamma(k as f64) - psi_m / nf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub index: usize,
    pub coord: FeatureCoord,
    /// Clamped at zero; used for ordering.
    pub mi: f64,
    pub mi_raw: f64,
}

/// Features in descending MI order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub features: Vec<RankedFeature>,
}

impl FeatureRanking {
    pub fn indices(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.index).collect()
    }

    pub fn coords(&self) -> Vec<FeatureCoord> {
        self.features.iter().map(|f| f.coord).collect()
    }
}

/// MI for every feature, sorted descending with ties in coordinate order;
/// keeps the top `m`.
pub fn rank_and_select(tensor: &FeatureTensor, labels: &[Label], m: usize, k: usize, seed: u64) -> Result<FeatureRanking> {
    let nf = tensor.n_features();
    if m > nf {
        return Err(Error::invalid(format!("asked for {m} features, tensor has {nf}")));
    }
    if labels.len() != tensor.n_trials() {
        return Err(Error::invalid(format!(
            "{} labels for {} trials",
            labels.len(),
            tensor.n_trials()
        )));
    }
    let distinct: std::collections::BTreeSet<_> = labels.iter().collect();
    if distinct.len() < 2 {
        return Err(Error::Insufficient("labels cover fewer than 2 classes".into()));
    }
    let scores = (0..nf)
        .into_par_iter()
        .map(|f| mi_discrete_continuous(&tensor.column(f), labels, k, seed.wrapping_add(f as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut features: Vec<RankedFeature> = scores
        .into_iter()
        .enumerate()
        .map(|(index, raw)| RankedFeature {
            index,
            coord: tensor.coord_of(index),
            mi: raw.max(0.0),
            mi_raw: raw,
        })
        .collect();
    features.sort_by(|a, b| b.mi.total_cmp(&a.mi).then(a.index.cmp(&b.index)));
    features.truncate(m);
    Ok(FeatureRanking { features })
}
