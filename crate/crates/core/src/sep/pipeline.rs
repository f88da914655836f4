use serde::{Deserialize, Serialize};

use super::{average_sep, correlation_map, snr_map, top_k_snr_channels, CorrelationMap, SnrMap};
use crate::dsp::{
    common_average_reference, epochize, reject_trials, remove_stimulus_artifact_with, EpochWarning, FilterChain,
    Replacement, StdPooling, NATIVE_FS,
};
use crate::error::{Error, Result};
use crate::model::{EpochSet, Event, EventKind, Recording};
use crate::stats::{t_test_one_sample, Tail, TTest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SepConfig {
    pub percentile: f64,
    pub pooling: StdPooling,
    pub max_lag_ms: f64,
    pub epoch_ms: f64,
    pub chain: FilterChain,
    /// `None` uses the native geometry at 4800 Hz and fails elsewhere.
    pub replacement: Option<Replacement>,
    pub skip_artifact: bool,
    /// Keep only triggers delivered at this current.
    pub current_ma: Option<f64>,
}

impl Default for SepConfig {
    fn default() -> Self {
        Self {
            percentile: 0.8,
            pooling: StdPooling::Pooled,
            max_lag_ms: 5.0,
            epoch_ms: 70.0,
            chain: FilterChain::sep_default(),
            replacement: None,
            skip_artifact: false,
            current_ma: None,
        }
    }
}

/// Median SNR across channels tested against 0 dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub n_trials: usize,
    pub n_accepted: usize,
    pub session_median_db: f64,
    pub between_channel_variance: Option<f64>,
    pub top2: Vec<usize>,
    pub top2_median_db: Option<f64>,
    pub t_test: Option<TTest>,
}

#[derive(Debug, Clone)]
pub struct SepAnalysis {
    pub epochs: EpochSet,
    pub averages: Vec<Vec<f64>>,
    pub snr: SnrMap,
    pub correlation: Option<CorrelationMap>,
    pub stats: SessionStats,
    pub warnings: Vec<String>,
}

fn select_current(recording: &Recording, current_ma: Option<f64>) -> Recording {
    let Some(target) = current_ma else {
        return recording.clone();
    };
    let events: Vec<Event> = recording
        .events
        .iter()
        .filter(|e| {
            e.kind != EventKind::StimulusTrigger || e.current_ma.is_some_and(|c| (c - target).abs() < 1e-9)
        })
        .cloned()
        .collect();
    Recording {
        events,
        ..recording.clone()
    }
}

/// Artifact replacement, filtering, epoching, trial rejection, CAR, then the
/// SNR and correlation maps.
pub fn analyze(recording: &Recording, cfg: &SepConfig) -> Result<SepAnalysis> {
    recording.ensure_valid()?;
    let mut warnings = Vec::new();
    let rec = select_current(recording, cfg.current_ma);
    if rec.events_of(&[EventKind::StimulusTrigger]).next().is_none() {
        return Err(Error::Insufficient("no stimulus triggers selected".into()));
    }
    let rec = if cfg.skip_artifact {
        rec
    } else {
        let rep = match cfg.replacement {
            Some(r) => r,
            None if rec.fs == NATIVE_FS => Replacement::NATIVE,
            None => {
                return Err(Error::invalid(format!(
                    "artifact replacement is defined at {NATIVE_FS} Hz, recording is at {} Hz",
                    rec.fs
                )))
            }
        };
        remove_stimulus_artifact_with(&rec, rep)?
    };
    let filtered = cfg.chain.apply_recording(&rec)?;
    let cut = epochize(&filtered, &[EventKind::StimulusTrigger], cfg.epoch_ms, cfg.epoch_ms)?;
    warnings.extend(cut.warnings.iter().map(|w: &EpochWarning| format!("trigger at {}: {}", w.sample_index, w.reason)));
    let epochs = reject_trials(&cut.epochs, cfg.percentile, cfg.pooling)?;
    let epochs = common_average_reference(&epochs)?;

    let snr = snr_map(&epochs, &filtered.geometry)?;
    let averages = average_sep(&epochs)?;
    let correlation = match correlation_map(&epochs, &snr, cfg.max_lag_ms) {
        Ok(m) => Some(m),
        Err(e) => {
            warnings.push(format!("correlation map skipped: {e}"));
            None
        }
    };
    let medians: Vec<f64> = snr.medians().into_iter().map(|(_, m)| m).collect();
    let t_test = match t_test_one_sample(&medians, 0.0, Tail::Greater) {
        Ok(t) => Some(t),
        Err(e) => {
            warnings.push(format!("session t-test skipped: {e}"));
            None
        }
    };
    let top2 = top_k_snr_channels(&snr, 2).unwrap_or_default();
    let top2_median_db = (top2.len() == 2).then(|| {
        let a = snr.median_of(top2[0]).unwrap_or(f64::NAN);
        let b = snr.median_of(top2[1]).unwrap_or(f64::NAN);
        0.5 * (a + b)
    });
    let stats = SessionStats {
        n_trials: epochs.n_trials(),
        n_accepted: epochs.accepted_trials().len(),
        session_median_db: snr.session_median,
        between_channel_variance: snr.between_channel_variance,
        top2,
        top2_median_db,
        t_test,
    };
    Ok(SepAnalysis {
        epochs,
        averages,
        snr,
        correlation,
        stats,
        warnings,
    })
}
