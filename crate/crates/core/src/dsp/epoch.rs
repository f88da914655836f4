use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EpochSet, EventKind, Label, Recording};

/// A selected event that could not be cut because its window ran off the
/// recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochWarning {
    pub sample_index: usize,
    pub kind: EventKind,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Epoched {
    pub epochs: EpochSet,
    pub warnings: Vec<EpochWarning>,
}

pub fn ms_to_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round() as usize
}

/// Cuts `[t − pre, t + post)` around every event of the selected kinds, so
/// the event sample is the first post-event sample.
pub fn epochize(recording: &Recording, kinds: &[EventKind], pre_ms: f64, post_ms: f64) -> Result<Epoched> {
    recording.ensure_valid()?;
    if pre_ms < 0.0 || post_ms <= 0.0 {
        return Err(Error::invalid(format!(
            "epoch extent must be non-negative, got -{pre_ms}/+{post_ms} ms"
        )));
    }
    let fs = recording.fs;
    let pre = ms_to_samples(pre_ms, fs);
    let post = ms_to_samples(post_ms, fs);
    let n = recording.n_samples();
    let n_channels = recording.n_channels();

    let mut events: Vec<_> = recording.events_of(kinds).cloned().collect();
    events.sort_by_key(|e| e.sample_index);

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut onsets = Vec::new();
    let mut warnings = Vec::new();
    for e in events {
        let t = e.sample_index;
        if t < pre || t + post > n {
            warnings.push(EpochWarning {
                sample_index: t,
                kind: e.kind,
                reason: format!("window [{}, {}) outside recording of {n} samples", t as i64 - pre as i64, t + post),
            });
            continue;
        }
        for ch in &recording.samples {
            data.extend_from_slice(&ch[t - pre..t + post]);
        }
        labels.push(Label::from_event(e.kind));
        onsets.push(t);
    }
    let n_trials = labels.len();
    let mut epochs = EpochSet::new(data, n_trials, n_channels, pre, post, fs, labels, onsets)?;
    epochs.rejected_channels = recording.geometry.rejected.clone();
    Ok(Epoched { epochs, warnings })
}

/// Linear-interpolation quantile of `values` (need not be sorted).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub(crate) fn sample_std<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for &x in values {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    if n < 2 {
        0.0
    } else {
        (m2 / (n - 1) as f64).sqrt()
    }
}

/// How per-trial noise is summarised for rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdPooling {
    /// One standard deviation over all active channels and samples of a trial.
    #[default]
    Pooled,
    /// One standard deviation per channel; a trial is rejected if any of its
    /// channels exceeds that channel's percentile.
    PerChannel,
}

/// Marks trials whose standard deviation is strictly greater than the given
/// percentile of the distribution over accepted trials. Sample data is not
/// touched.
pub fn reject_trials(epochs: &EpochSet, percentile: f64, pooling: StdPooling) -> Result<EpochSet> {
    if !(0.0..=1.0).contains(&percentile) {
        return Err(Error::invalid(format!("percentile {percentile} not in [0, 1]")));
    }
    let trials = epochs.accepted_trials();
    if trials.len() < 2 {
        return Err(Error::Insufficient(format!(
            "trial rejection needs at least 2 accepted trials, have {}",
            trials.len()
        )));
    }
    let channels = epochs.active_channels();
    let mut out = epochs.clone();
    match pooling {
        StdPooling::Pooled => {
            let stds: Vec<f64> = trials
                .iter()
                .map(|&t| sample_std(channels.iter().flat_map(|&c| epochs.trace(t, c))))
                .collect();
            let cut = quantile(&stds, percentile);
            for (&t, &s) in trials.iter().zip(&stds) {
                if s > cut {
                    out.accepted[t] = false;
                }
            }
        }
        StdPooling::PerChannel => {
            for &c in &channels {
                let stds: Vec<f64> = trials.iter().map(|&t| sample_std(epochs.trace(t, c))).collect();
                let cut = quantile(&stds, percentile);
                for (&t, &s) in trials.iter().zip(&stds) {
                    if s > cut {
                        out.accepted[t] = false;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Subtracts the per-sample mean over non-rejected channels from each
/// non-rejected channel. Rejected channels are left as they are.
pub fn common_average_reference(epochs: &EpochSet) -> Result<EpochSet> {
    let channels = epochs.active_channels();
    if channels.len() < 2 {
        return Err(Error::Insufficient(format!(
            "common average reference needs at least 2 channels, have {}",
            channels.len()
        )));
    }
    let len = epochs.window_len();
    let inv = 1.0 / channels.len() as f64;
    let mut out = epochs.clone();
    let mut mean = vec![0.0; len];
    for t in 0..epochs.n_trials() {
        mean.iter_mut().for_each(|m| *m = 0.0);
        for &c in &channels {
            for (m, v) in mean.iter_mut().zip(epochs.trace(t, c)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m *= inv);
        for &c in &channels {
            for (v, m) in out.trace_mut(t, c).iter_mut().zip(&mean) {
                *v -= m;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrayGeometry, Event};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise_epochs(trials: usize, channels: usize, len: usize, seed: u64) -> EpochSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(trials * channels * len);
        let mut scales = Vec::new();
        for _ in 0..trials {
            scales.push(rng.random_range(0.5..2.0));
        }
        for &s in &scales {
            for _ in 0..channels * len {
                let z: f64 = rng.sample(StandardNormal);
                data.push(s * z);
            }
        }
        EpochSet::new(data, trials, channels, len / 2, len - len / 2, 1000.0, vec![Label::Stimulus; trials], (0..trials).collect()).unwrap()
    }

    fn recording_with(n: usize, fs: f64, triggers: &[usize]) -> Recording {
        let samples = (0..2).map(|c| (0..n).map(|i| (i + c * n) as f64).collect()).collect();
        let mut r = Recording::new(samples, fs, ArrayGeometry::linear(2, 5.0, 1.0));
        r.events = triggers.iter().map(|&t| Event::new(t, EventKind::StimulusTrigger)).collect();
        r
    }

    #[test]
    fn sep_epoch_length_at_4800() {
        let r = recording_with(10_000, 4800.0, &[5000]);
        let e = epochize(&r, &[EventKind::StimulusTrigger], 70.0, 70.0).unwrap().epochs;
        assert_eq!((e.pre_samples, e.post_samples), (336, 336));
        assert_eq!(e.window_len(), 672);
        assert_eq!(e.trace(0, 0)[336], 5000.0);
        assert_eq!(e.trace(0, 1)[0], (10_000 + 5000 - 336) as f64);
    }

    #[test]
    fn movement_epoch_length_at_1024() {
        let r = recording_with(4000, 1024.0, &[]);
        let mut r = r;
        r.events.push(Event::new(2000, EventKind::MoveLeft));
        let e = epochize(&r, &[EventKind::MoveLeft, EventKind::MoveRight], 200.0, 500.0).unwrap().epochs;
        assert_eq!((e.pre_samples, e.post_samples), (205, 512));
        assert_eq!(e.labels, vec![Label::Left]);
    }

    #[test]
    fn edge_events_are_dropped_with_warning() {
        let mut triggers: Vec<usize> = (1..10).map(|i| i * 1000).collect();
        triggers.push(3);
        let r = recording_with(11_000, 4800.0, &triggers);
        let out = epochize(&r, &[EventKind::StimulusTrigger], 70.0, 70.0).unwrap();
        assert_eq!(out.epochs.n_trials(), 9);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].sample_index, 3);
        assert!(out.epochs.onsets.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn outlier_trial_is_rejected() {
        let mut e = noise_epochs(10, 4, 100, 1);
        for v in e.trial_mut(6) {
            *v *= 100.0;
        }
        let r = reject_trials(&e, 0.8, StdPooling::Pooled).unwrap();
        assert!(!r.accepted[6]);
        let r = reject_trials(&e, 0.8, StdPooling::PerChannel).unwrap();
        assert!(!r.accepted[6]);
    }

    #[test]
    fn identical_trials_are_all_kept() {
        let one: Vec<f64> = (0..2 * 50).map(|i| (i as f64).sin()).collect();
        let data: Vec<f64> = (0..8).flat_map(|_| one.iter().copied()).collect();
        let e = EpochSet::new(data, 8, 2, 25, 25, 1000.0, vec![Label::Stimulus; 8], (0..8).collect()).unwrap();
        let r = reject_trials(&e, 0.8, StdPooling::Pooled).unwrap();
        assert!(r.accepted.iter().all(|&a| a));
    }

    #[test]
    fn rejection_keeps_eighty_percent() {
        let e = noise_epochs(1000, 2, 40, 7);
        let r = reject_trials(&e, 0.8, StdPooling::Pooled).unwrap();
        let kept = r.accepted.iter().filter(|&&a| a).count() as f64 / 1000.0;
        assert!((kept - 0.8).abs() <= 0.02, "kept {kept}");
    }

    #[test]
    fn rejection_needs_two_trials() {
        let e = noise_epochs(1, 2, 10, 0);
        assert!(reject_trials(&e, 0.8, StdPooling::Pooled).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.8), 4.2);
    }

    #[test]
    fn car_zeroes_channel_mean() {
        let e = common_average_reference(&noise_epochs(3, 5, 64, 3)).unwrap();
        for t in 0..3 {
            for s in 0..64 {
                let m: f64 = (0..5).map(|c| e.trace(t, c)[s]).sum::<f64>() / 5.0;
                assert!(m.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn car_leaves_antisymmetric_pair() {
        let v: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).cos()).collect();
        let data: Vec<f64> = v.iter().copied().chain(v.iter().map(|x| -x)).collect();
        let e = EpochSet::new(data, 1, 2, 10, 10, 1000.0, vec![Label::Stimulus], vec![0]).unwrap();
        let out = common_average_reference(&e).unwrap();
        assert_eq!(out, e);
    }

    #[test]
    fn car_removes_common_mode() {
        let base = noise_epochs(2, 4, 96, 5);
        let mut noisy = base.clone();
        for t in 0..2 {
            for c in 0..4 {
                for (i, v) in noisy.trace_mut(t, c).iter_mut().enumerate() {
                    *v += 30.0 * (2.0 * std::f64::consts::PI * 50.0 * i as f64 / 4800.0).sin();
                }
            }
        }
        let a = common_average_reference(&base).unwrap();
        let b = common_average_reference(&noisy).unwrap();
        for t in 0..2 {
            for c in 0..4 {
                for (x, y) in a.trace(t, c).iter().zip(b.trace(t, c)) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn car_skips_rejected_channels() {
        let mut e = noise_epochs(2, 4, 16, 9);
        e.rejected_channels.insert(2);
        let out = common_average_reference(&e).unwrap();
        assert_eq!(out.trace(1, 2), e.trace(1, 2));
        let m: f64 = [0, 1, 3].iter().map(|&c| out.trace(0, c)[5]).sum();
        assert!(m.abs() < 1e-10);
        e.rejected_channels.extend([0, 1]);
        assert!(common_average_reference(&e).is_err());
    }

    proptest! {
        #[test]
        fn car_is_idempotent(seed in 0u64..500, channels in 2usize..7) {
            let once = common_average_reference(&noise_epochs(2, channels, 32, seed)).unwrap();
            let twice = common_average_reference(&once).unwrap();
            for t in 0..2 {
                for c in 0..channels {
                    for (x, y) in once.trace(t, c).iter().zip(twice.trace(t, c)) {
                        prop_assert!((x - y).abs() < 1e-10);
                    }
                }
            }
        }

        #[test]
        fn rejection_only_touches_mask(seed in 0u64..500, pct in 0.1f64..0.95) {
            let e = noise_epochs(12, 3, 20, seed);
            let r = reject_trials(&e, pct, StdPooling::Pooled).unwrap();
            for t in 0..12 {
                prop_assert_eq!(r.trial(t), e.trial(t));
            }
        }
    }
}
