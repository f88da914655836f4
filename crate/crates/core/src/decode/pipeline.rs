use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, fold_indices, lda_fit, lda_predict, sample_rest_epochs, stratified_holdout, FoldMode};
use crate::dsp::{common_average_reference, epochize, FilterChain};
use crate::error::{Error, Result};
use crate::features::{default_windows, extract_features, rank_and_select, WaveletParams, DEFAULT_K};
use crate::model::{BandSet, ClassificationReport, EpochSet, EventKind, FeatureCoord, FeatureTensor, Label, Recording, Window};
use crate::stats::mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeConfig {
    pub bands: BandSet,
    pub windows: Vec<Window>,
    pub top_m: usize,
    pub folds: usize,
    pub fold_mode: FoldMode,
    /// 2 for left/right, 3 adds sampled rest epochs.
    pub n_classes: usize,
    /// Keep only windows that end at or before movement onset.
    pub pre_move_only: bool,
    pub k: usize,
    pub pre_ms: f64,
    pub post_ms: f64,
    pub holdout_every: usize,
    pub chain: FilterChain,
    pub wavelet: WaveletParams,
    /// Shuffle labels before splitting, as a null control.
    pub permute_labels: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            bands: BandSet::standard(),
            windows: default_windows(),
            top_m: 15,
            folds: 5,
            fold_mode: FoldMode::Contiguous,
            n_classes: 2,
            pre_move_only: false,
            k: DEFAULT_K,
            pre_ms: 200.0,
            post_ms: 500.0,
            holdout_every: 5,
            chain: FilterChain::behaviour_default(),
            wavelet: WaveletParams::default(),
            permute_labels: false,
        }
    }
}

impl DecodeConfig {
    pub fn active_windows(&self) -> Vec<Window> {
        if self.pre_move_only {
            self.windows.iter().copied().filter(|w| w.end_ms <= 0.0).collect()
        } else {
            self.windows.clone()
        }
    }
}

/// A selected feature in human-facing form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeature {
    /// 1-based channel number in the recording.
    pub channel: usize,
    pub band: String,
    pub window: Window,
    pub mi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Over the predictions of every held-out fold.
    pub pooled: ClassificationReport,
    pub selected: Vec<Vec<FeatureCoord>>,
}

const SEED_REST: u64 = 0x5245_5354;
const SEED_PERMUTE: u64 = 0x5045_524d;
const SEED_MI: u64 = 0x4d49;
const SEED_FOLDS: u64 = 0x464f_4c44;

fn rows_of(t: &FeatureTensor, cols: &[usize]) -> Vec<Vec<f64>> {
    (0..t.n_trials()).map(|i| cols.iter().map(|&c| t.row(i)[c]).collect()).collect()
}

fn chance_of(labels: &[Label]) -> f64 {
    let distinct: std::collections::BTreeSet<_> = labels.iter().collect();
    1.0 / distinct.len() as f64
}

/// Fit selection + LDA on `train` rows, predict `test` rows.
fn fit_predict(
    tensor: &FeatureTensor,
    labels: &[Label],
    train: &[usize],
    test: &[usize],
    cfg: &DecodeConfig,
    seed: u64,
) -> Result<(Vec<Label>, Vec<FeatureCoord>)> {
    let tr = tensor.select_trials(train);
    let tr_labels: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
    let ranking = rank_and_select(&tr, &tr_labels, cfg.top_m, cfg.k, seed ^ SEED_MI)?;
    let cols = ranking.indices();
    let model = lda_fit(&rows_of(&tr, &cols), &tr_labels)?;
    let te = tensor.select_trials(test);
    let pred = lda_predict(&model, &rows_of(&te, &cols))?;
    Ok((pred.into_iter().map(|p| p.label).collect(), ranking.coords()))
}

/// k-fold cross-validation over time-ordered trials; selection and the
/// classifier are refit inside every fold.
pub fn cross_validate(tensor: &FeatureTensor, labels: &[Label], cfg: &DecodeConfig, seed: u64) -> Result<CvResult> {
    let n = tensor.n_trials();
    if labels.len() != n {
        return Err(Error::invalid(format!("{} labels for {n} trials", labels.len())));
    }
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    if let Some((l, c)) = counts.iter().find(|(_, &c)| c < cfg.folds) {
        return Err(Error::Insufficient(format!(
            "class {} has {c} trials, fewer than {} folds",
            l.name(),
            cfg.folds
        )));
    }
    let folds = fold_indices(n, cfg.folds, cfg.fold_mode, seed ^ SEED_FOLDS)?;
    let results = folds
        .par_iter()
        .map(|test| {
            let train: Vec<usize> = (0..n).filter(|i| test.binary_search(i).is_err()).collect();
            fit_predict(tensor, labels, &train, test, cfg, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pred = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut fold_accuracies = Vec::new();
    let mut selected = Vec::new();
    for (test, (p, coords)) in folds.iter().zip(results) {
        let correct = test.iter().zip(&p).filter(|(&i, &l)| labels[i] == l).count();
        fold_accuracies.push(correct as f64 / test.len() as f64);
        truth.extend(test.iter().map(|&i| labels[i]));
        pred.extend(p);
        selected.push(coords);
    }
    let m = mean(&fold_accuracies);
    let std = (fold_accuracies.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (fold_accuracies.len() - 1) as f64).sqrt();
    Ok(CvResult {
        mean_accuracy: m,
        std_accuracy: std,
        pooled: evaluate(&pred, &truth, chance_of(labels))?,
        fold_accuracies,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub seed: u64,
    pub config: DecodeConfig,
    pub class_counts: BTreeMap<Label, usize>,
    pub n_train: usize,
    pub n_test: usize,
    pub dropped_events: usize,
    pub cv: CvResult,
    pub holdout: ClassificationReport,
    pub selected: Vec<SelectedFeature>,
}

/// Epochs for decoding: band-passed, cut around movement onsets, CAR, with
/// rest epochs added for the 3-class task.
pub fn decoding_epochs(recording: &Recording, cfg: &DecodeConfig, seed: u64) -> Result<(EpochSet, usize)> {
    if !(2..=3).contains(&cfg.n_classes) {
        return Err(Error::invalid(format!("classes must be 2 or 3, got {}", cfg.n_classes)));
    }
    let filtered = cfg.chain.apply_recording(recording)?;
    let cut = epochize(&filtered, &[EventKind::MoveLeft, EventKind::MoveRight], cfg.pre_ms, cfg.post_ms)?;
    let dropped = cut.warnings.len();
    let movement = common_average_reference(&cut.epochs)?;
    let epochs = if cfg.n_classes == 3 {
        // As many rest epochs as the average movement class.
        let count = (movement.n_trials() as f64 / 2.0).round() as usize;
        let rest = sample_rest_epochs(&filtered, &cut.epochs, count, seed ^ SEED_REST)?;
        movement.concat(&common_average_reference(&rest)?)?.sorted_chronologically()
    } else {
        movement
    };
    Ok((epochs, dropped))
}

pub fn run_decode(recording: &Recording, cfg: &DecodeConfig, seed: u64) -> Result<DecodeReport> {
    recording.ensure_valid()?;
    let (mut epochs, dropped_events) = decoding_epochs(recording, cfg, seed)?;
    if cfg.permute_labels {
        epochs.labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ SEED_PERMUTE));
    }
    let mut class_counts = BTreeMap::new();
    for &l in &epochs.labels {
        *class_counts.entry(l).or_default() += 1;
    }
    if class_counts.len() < 2 {
        return Err(Error::Insufficient("recording has movement events of only one class".into()));
    }
    let (train, test) = stratified_holdout(&epochs, cfg.holdout_every)?;
    let windows = cfg.active_windows();
    if windows.is_empty() {
        return Err(Error::invalid("no analysis windows selected"));
    }
    let train_x = extract_features(&train, &cfg.bands, &windows, cfg.wavelet)?;
    let test_x = extract_features(&test, &cfg.bands, &windows, cfg.wavelet)?;
    let top_m = cfg.top_m.min(train_x.n_features());
    let cfg_eff = DecodeConfig { top_m, ..cfg.clone() };

    let cv = cross_validate(&train_x, &train.labels, &cfg_eff, seed)?;

    let ranking = rank_and_select(&train_x, &train.labels, top_m, cfg.k, seed ^ SEED_MI)?;
    let cols = ranking.indices();
    let model = lda_fit(&rows_of(&train_x, &cols), &train.labels)?;
    let pred: Vec<Label> = lda_predict(&model, &rows_of(&test_x, &cols))?
        .into_iter()
        .map(|p| p.label)
        .collect();
    let holdout = evaluate(&pred, &test.labels, chance_of(&epochs.labels))?;
    let selected = ranking
        .features
        .iter()
        .map(|f| SelectedFeature {
            channel: train_x.channels[f.coord.channel] + 1,
            band: train_x.bands[f.coord.band].clone(),
            window: train_x.windows[f.coord.window],
            mi: f.mi,
        })
        .collect();
    Ok(DecodeReport {
        seed,
        config: cfg_eff,
        class_counts,
        n_train: train.n_trials(),
        n_test: test.n_trials(),
        dropped_events,
        cv,
        holdout,
        selected,
    })
}
