//! SEP signal-quality metrics: per-trial SNR, trial averages, lag-bounded
//! cross-correlation and their maps over the electrode array.

mod compare;
mod pipeline;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use compare::{compare_groups, GroupComparison, GroupSummary};
pub use pipeline::{analyze, SepAnalysis, SepConfig, SessionStats};

use crate::dsp::ms_to_samples;
use crate::error::{Error, Result};
use crate::model::{ArrayGeometry, EpochSet};
use crate::stats::{median, variance};

/// Inner and outer edge of the SNR windows, in ms from the event.
pub const SNR_WINDOW_MS: (f64, f64) = (10.0, 70.0);

/// Sample ranges `[−70, −10)` ms and `[+10, +70)` ms of an epoch whose
/// event sits at index `pre_samples`.
pub fn snr_windows(pre_samples: usize, len: usize, fs: f64) -> Result<(Range<usize>, Range<usize>)> {
    let inner = ms_to_samples(SNR_WINDOW_MS.0, fs);
    let outer = ms_to_samples(SNR_WINDOW_MS.1, fs);
    if pre_samples < outer || pre_samples + outer > len {
        return Err(Error::invalid(format!(
            "epoch must span ±{} ms around the event ({} samples each side)",
            SNR_WINDOW_MS.1, outer
        )));
    }
    if inner >= outer || outer - inner < 2 {
        return Err(Error::invalid("SNR windows hold fewer than 2 samples at this rate"));
    }
    Ok((pre_samples - outer..pre_samples - inner, pre_samples + inner..pre_samples + outer))
}

/// Post/pre variance ratio in dB for one channel of one trial.
pub fn sep_snr(trace: &[f64], pre_samples: usize, fs: f64) -> Result<f64> {
    let (pre, post) = snr_windows(pre_samples, trace.len(), fs)?;
    let v_pre = variance(&trace[pre]);
    let v_post = variance(&trace[post]);
    if !(v_pre > 0.0) {
        return Err(Error::Degenerate("zero variance in the pre-stimulus window".into()));
    }
    Ok(10.0 * (v_post / v_pre).log10())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSnr {
    pub channel: usize,
    /// One value per accepted trial, in dB.
    pub trials: Vec<f64>,
    pub median: f64,
}

/// Per-channel SNR over accepted trials, aligned with the array geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrMap {
    pub geometry: ArrayGeometry,
    /// Indexed by channel; `None` for rejected channels.
    pub channels: Vec<Option<ChannelSnr>>,
    /// Median over channels of the per-channel medians (dB).
    pub session_median: f64,
    /// Sample variance over channels of the per-channel medians, computed on
    /// dB values. `None` with fewer than two channels.
    pub between_channel_variance: Option<f64>,
}

impl SnrMap {
    pub fn medians(&self) -> Vec<(usize, f64)> {
        self.channels.iter().flatten().map(|c| (c.channel, c.median)).collect()
    }

    pub fn median_of(&self, channel: usize) -> Option<f64> {
        self.channels.get(channel)?.as_ref().map(|c| c.median)
    }
}

pub fn snr_map(epochs: &EpochSet, geometry: &ArrayGeometry) -> Result<SnrMap> {
    if geometry.n_channels() != epochs.n_channels() {
        return Err(Error::invalid(format!(
            "geometry has {} channels, epochs have {}",
            geometry.n_channels(),
            epochs.n_channels()
        )));
    }
    let trials = epochs.accepted_trials();
    if trials.is_empty() {
        return Err(Error::Insufficient("all trials rejected".into()));
    }
    let mut channels = Vec::with_capacity(epochs.n_channels());
    for c in 0..epochs.n_channels() {
        if geometry.is_rejected(c) {
            channels.push(None);
            continue;
        }
        let values = trials
            .iter()
            .map(|&t| sep_snr(epochs.trace(t, c), epochs.pre_samples, epochs.fs))
            .collect::<Result<Vec<_>>>()?;
        let median = median(&values);
        channels.push(Some(ChannelSnr {
            channel: c,
            trials: values,
            median,
        }));
    }
    let medians: Vec<f64> = channels.iter().flatten().map(|c| c.median).collect();
    if medians.is_empty() {
        return Err(Error::Insufficient("every channel is rejected".into()));
    }
    Ok(SnrMap {
        geometry: geometry.clone(),
        session_median: median(&medians),
        between_channel_variance: (medians.len() >= 2).then(|| variance(&medians)),
        channels,
    })
}

/// Mean over accepted trials, one trace per channel.
pub fn average_sep(epochs: &EpochSet) -> Result<Vec<Vec<f64>>> {
    let trials = epochs.accepted_trials();
    if trials.is_empty() {
        return Err(Error::Insufficient("no accepted trials to average".into()));
    }
    let inv = 1.0 / trials.len() as f64;
    Ok((0..epochs.n_channels())
        .map(|c| {
            let mut acc = vec![0.0; epochs.window_len()];
            for &t in &trials {
                for (a, v) in acc.iter_mut().zip(epochs.trace(t, c)) {
                    *a += v;
                }
            }
            acc.iter_mut().for_each(|a| *a *= inv);
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XcorrPeak {
    /// Signed normalised correlation at the peak.
    pub corr: f64,
    pub lag_samples: i64,
    pub lag_ms: f64,
}

/// Normalised cross-correlation `Σ a[i]·b[i+lag] / √(Σa²·Σb²)`, maximised in
/// absolute value over `|lag| ≤ max_lag_ms`. A positive lag means `b` trails
/// `a`. Ties go to the smaller |lag|, then to the negative lag.
pub fn xcorr_peak(a: &[f64], b: &[f64], max_lag_ms: f64, fs: f64) -> Result<XcorrPeak> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("trace lengths differ: {} vs {}", a.len(), b.len())));
    }
    let max_lag = ms_to_samples(max_lag_ms, fs);
    if max_lag == 0 {
        return Err(Error::invalid(format!("max lag {max_lag_ms} ms is below one sample")));
    }
    let ea: f64 = a.iter().map(|v| v * v).sum();
    let eb: f64 = b.iter().map(|v| v * v).sum();
    if !(ea > 0.0 && eb > 0.0) {
        return Err(Error::Degenerate("zero-energy trace in cross-correlation".into()));
    }
    let norm = (ea * eb).sqrt();
    let n = a.len() as i64;
    let at = |lag: i64| -> f64 {
        let lo = 0.max(-lag);
        let hi = n.min(n - lag);
        (lo..hi).map(|i| a[i as usize] * b[(i + lag) as usize]).sum::<f64>() / norm
    };
    let max_lag = (max_lag as i64).min(n - 1);
    let mut best = (at(0), 0i64);
    for l in 1..=max_lag {
        for lag in [-l, l] {
            let c = at(lag);
            if c.abs() > best.0.abs() {
                best = (c, lag);
            }
        }
    }
    Ok(XcorrPeak {
        corr: best.0,
        lag_samples: best.1,
        lag_ms: best.1 as f64 * 1000.0 / fs,
    })
}

/// Pairwise peak correlations between eligible channels (median SNR > 0 dB),
/// stored as a full square matrix with only the upper triangle filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub max_lag_ms: f64,
    pub eligible: Vec<bool>,
    /// Row-major `n × n`; `None` below the diagonal and for ineligible channels.
    pub cells: Vec<Option<XcorrPeak>>,
}

impl CorrelationMap {
    pub fn n_channels(&self) -> usize {
        self.eligible.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<XcorrPeak> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.cells[i * self.n_channels() + j]
    }
}

pub fn correlation_map(epochs: &EpochSet, snr: &SnrMap, max_lag_ms: f64) -> Result<CorrelationMap> {
    let n = epochs.n_channels();
    let eligible: Vec<bool> = (0..n)
        .map(|c| !epochs.rejected_channels.contains(&c) && snr.median_of(c).is_some_and(|m| m > 0.0))
        .collect();
    let count = eligible.iter().filter(|&&e| e).count();
    if count < 2 {
        return Err(Error::Insufficient(format!(
            "correlation map needs at least 2 channels with median SNR > 0 dB, have {count}"
        )));
    }
    let avg = average_sep(epochs)?;
    let mut cells = vec![None; n * n];
    for i in 0..n {
        if !eligible[i] {
            continue;
        }
        cells[i * n + i] = Some(XcorrPeak {
            corr: 1.0,
            lag_samples: 0,
            lag_ms: 0.0,
        });
        for j in i + 1..n {
            if eligible[j] {
                cells[i * n + j] = Some(xcorr_peak(&avg[i], &avg[j], max_lag_ms, epochs.fs)?);
            }
        }
    }
    Ok(CorrelationMap {
        max_lag_ms,
        eligible,
        cells,
    })
}

/// The `k` channels with the greatest median SNR, ties to the lower index.
pub fn top_k_snr_channels(snr: &SnrMap, k: usize) -> Result<Vec<usize>> {
    let mut medians = snr.medians();
    if medians.len() < k {
        return Err(Error::Insufficient(format!(
            "asked for top {k} channels, only {} have SNR values",
            medians.len()
        )));
    }
    medians.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(medians.into_iter().take(k).map(|(c, _)| c).collect())
}
