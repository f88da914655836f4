use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{line_window_variance, pink, pink_window_variance, white};
use crate::dsp::{ms_to_samples, NATIVE_FS};
use crate::error::{Error, Result};
use crate::model::{ArrayGeometry, Event, EventKind, Recording};
use crate::sep::{snr_windows, SNR_WINDOW_MS};
use crate::stats::variance;

/// One Gaussian-enveloped lobe of the evoked response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub latency_ms: f64,
    pub width_ms: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SepSource {
    pub channel: usize,
    /// +1 or −1.
    #[serde(default = "one")]
    pub polarity: f64,
    /// Target SNR; sets the template gain from the noise budget.
    #[serde(default)]
    pub snr_db: Option<f64>,
    /// Explicit template peak amplitude (µV); used when `snr_db` is absent.
    #[serde(default)]
    pub amplitude_uv: Option<f64>,
    #[serde(default)]
    pub latency_shift_ms: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SepSynthConfig {
    pub rows: usize,
    pub cols: usize,
    pub pitch_mm: f64,
    pub diameter_mm: f64,
    pub n_trials: usize,
    pub period_ms: f64,
    pub lead_ms: f64,
    pub lobes: Vec<Lobe>,
    pub sources: Vec<SepSource>,
    pub white_uv: f64,
    pub pink_uv: f64,
    pub line_uv: f64,
    pub line_hz: f64,
    /// Peak of a decaying stimulus artifact on every channel; 0 disables.
    pub artifact_uv: f64,
    pub current_ma: Option<f64>,
    pub rejected: Vec<usize>,
    pub seed: u64,
}

impl Default for SepSynthConfig {
    fn default() -> Self {
        Self {
            rows: 3,
            cols: 3,
            pitch_mm: 5.0,
            diameter_mm: 3.0,
            n_trials: 100,
            period_ms: 250.0,
            lead_ms: 300.0,
            lobes: vec![
                Lobe {
                    latency_ms: 25.0,
                    width_ms: 5.0,
                    weight: 1.0,
                },
                Lobe {
                    latency_ms: 50.0,
                    width_ms: 8.0,
                    weight: -0.8,
                },
            ],
            sources: vec![SepSource {
                channel: 4,
                polarity: 1.0,
                snr_db: Some(6.0),
                amplitude_uv: None,
                latency_shift_ms: 0.0,
            }],
            white_uv: 2.0,
            pink_uv: 2.0,
            line_uv: 1.0,
            line_hz: 50.0,
            artifact_uv: 0.0,
            current_ma: None,
            rejected: Vec::new(),
            seed: 0,
        }
    }
}

/// Expected window statistics of one channel, as planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTruth {
    pub channel: usize,
    pub gain_uv: f64,
    pub pre_variance: f64,
    pub post_variance: f64,
    pub variance_ratio: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SepTruth {
    pub seed: u64,
    pub fs: f64,
    pub triggers: Vec<usize>,
    pub channels: Vec<ChannelTruth>,
    pub sources: Vec<usize>,
}

impl SepTruth {
    /// Channels ordered by planted SNR, highest first.
    pub fn ranked(&self) -> Vec<usize> {
        let mut c: Vec<&ChannelTruth> = self.channels.iter().collect();
        c.sort_by(|a, b| b.snr_db.total_cmp(&a.snr_db).then(a.channel.cmp(&b.channel)));
        c.into_iter().map(|c| c.channel).collect()
    }
}

impl SepSynthConfig {
    pub fn n_channels(&self) -> usize {
        self.rows * self.cols
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(format!("SEP synth config: {m}")));
        if self.n_channels() == 0 {
            return bad("empty grid".into());
        }
        if self.n_trials == 0 {
            return bad("at least one trial required".into());
        }
        if self.period_ms < 2.0 * SNR_WINDOW_MS.1 + 20.0 {
            return bad(format!("period {} ms is too short", self.period_ms));
        }
        if self.lead_ms < SNR_WINDOW_MS.1 + 30.0 {
            return bad(format!("lead {} ms leaves no pre-stimulus room", self.lead_ms));
        }
        for (name, v) in [
            ("white_uv", self.white_uv),
            ("pink_uv", self.pink_uv),
            ("line_uv", self.line_uv),
            ("artifact_uv", self.artifact_uv),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a non-negative amplitude"));
            }
        }
        if self.lobes.iter().any(|l| !(l.width_ms > 0.0) || !l.weight.is_finite()) {
            return bad("lobes need positive widths and finite weights".into());
        }
        for s in &self.sources {
            if s.channel >= self.n_channels() {
                return bad(format!("source channel {} outside the grid", s.channel));
            }
            if s.snr_db.is_none() && s.amplitude_uv.is_none() {
                return bad(format!("source {} needs snr_db or amplitude_uv", s.channel));
            }
            if s.amplitude_uv.is_some_and(|a| !(a >= 0.0)) {
                return bad(format!("source {} has a negative amplitude", s.channel));
            }
        }
        if let Some(r) = self.rejected.iter().find(|&&r| r >= self.n_channels()) {
            return bad(format!("rejected channel {r} outside the grid"));
        }
        Ok(())
    }

    fn template(&self, t_ms: f64) -> f64 {
        self.lobes
            .iter()
            .map(|l| l.weight * (-0.5 * ((t_ms - l.latency_ms) / l.width_ms).powi(2)).exp())
            .sum()
    }
}

/// Seeded SEP recording at 4800 Hz with its planted window statistics.
pub fn synth_sep_recording(cfg: &SepSynthConfig) -> Result<(Recording, SepTruth)> {
    cfg.check()?;
    let fs = NATIVE_FS;
    let period = ms_to_samples(cfg.period_ms, fs);
    let lead = ms_to_samples(cfg.lead_ms, fs);
    let n = lead + cfg.n_trials * period + ms_to_samples(cfg.period_ms, fs);
    let triggers: Vec<usize> = (0..cfg.n_trials).map(|i| lead + i * period).collect();

    // Window geometry shared by every trigger.
    let half = ms_to_samples(SNR_WINDOW_MS.1, fs);
    let (pre_w, post_w) = snr_windows(half, 2 * half, fs)?;
    let n_w = pre_w.len();
    let window_trace = |shift_ms: f64, r: &std::ops::Range<usize>| -> Vec<f64> {
        r.clone()
            .map(|i| cfg.template((i as f64 - half as f64) * 1000.0 / fs - shift_ms))
            .collect()
    };
    let noise_var = cfg.white_uv.powi(2)
        + pink_window_variance(n_w, n, fs, cfg.pink_uv)
        + line_window_variance(n_w, cfg.line_hz, fs, cfg.line_uv);

    let mut gains = BTreeMap::new();
    let mut truth = Vec::with_capacity(cfg.n_channels());
    for c in 0..cfg.n_channels() {
        let src = cfg.sources.iter().find(|s| s.channel == c);
        let (gain, vt_pre, vt_post) = match src {
            None => (0.0, 0.0, 0.0),
            Some(s) => {
                let vt_pre = variance(&window_trace(s.latency_shift_ms, &pre_w));
                let vt_post = variance(&window_trace(s.latency_shift_ms, &post_w));
                let gain = match (s.snr_db, s.amplitude_uv) {
                    (Some(db), _) => {
                        let r = 10f64.powf(db / 10.0);
                        let denom = vt_post - r * vt_pre;
                        if r < 1.0 || !(denom > 0.0) {
                            return Err(Error::invalid(format!(
                                "SEP synth config: source {c} cannot reach {db} dB with this template"
                            )));
                        }
                        ((r - 1.0) * noise_var / denom).sqrt()
                    }
                    (None, Some(a)) => a,
                    (None, None) => unreachable!("checked"),
                };
                gains.insert(c, gain * s.polarity);
                (gain, vt_pre, vt_post)
            }
        };
        let pre_variance = gain * gain * vt_pre + noise_var;
        let post_variance = gain * gain * vt_post + noise_var;
        let variance_ratio = post_variance / pre_variance;
        truth.push(ChannelTruth {
            channel: c,
            gain_uv: gain,
            pre_variance,
            post_variance,
            variance_ratio,
            snr_db: 10.0 * variance_ratio.log10(),
        });
    }

    let samples: Vec<Vec<f64>> = (0..cfg.n_channels())
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let mut x = white(n, cfg.white_uv, &mut rng);
            for (v, p) in x.iter_mut().zip(pink(n, fs, cfg.pink_uv, &mut rng)) {
                *v += p;
            }
            let phase = rng.random::<f64>() * 2.0 * PI;
            if cfg.line_uv > 0.0 {
                let w = 2.0 * PI * cfg.line_hz / fs;
                for (i, v) in x.iter_mut().enumerate() {
                    *v += cfg.line_uv * (w * i as f64 + phase).sin();
                }
            }
            if let Some(&g) = gains.get(&c) {
                let shift = cfg.sources.iter().find(|s| s.channel == c).map_or(0.0, |s| s.latency_shift_ms);
                // Lobes are negligible beyond ±period around each trigger.
                for &t in &triggers {
                    let lo = t.saturating_sub(period);
                    let hi = (t + period).min(n);
                    for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
                        *v += g * cfg.template((i as f64 - t as f64) * 1000.0 / fs - shift);
                    }
                }
            }
            if cfg.artifact_uv > 0.0 {
                for &t in &triggers {
                    for (j, v) in x.iter_mut().skip(t).take(32).enumerate() {
                        *v += cfg.artifact_uv * (-(j as f64) / 6.0).exp() * if j % 2 == 0 { 1.0 } else { -0.6 };
                    }
                }
            }
            x
        })
        .collect();

    let geometry = ArrayGeometry::grid(cfg.rows, cfg.cols, cfg.pitch_mm, cfg.diameter_mm)
        .with_rejected(cfg.rejected.iter().copied());
    let mut rec = Recording::new(samples, fs, geometry);
    rec.events = triggers
        .iter()
        .map(|&t| Event {
            current_ma: cfg.current_ma,
            ..Event::new(t, EventKind::StimulusTrigger)
        })
        .collect();
    rec.meta.insert("generator".into(), "synth_sep".into());
    rec.meta.insert("seed".into(), cfg.seed.to_string());
    let truth = SepTruth {
        seed: cfg.seed,
        fs,
        triggers,
        sources: cfg.sources.iter().map(|s| s.channel).collect(),
        channels: truth,
    };
    Ok((rec, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::epochize;
    use crate::sep::{sep_snr, snr_map};
    use crate::stats::median;

    fn quiet(source: SepSource) -> SepSynthConfig {
        SepSynthConfig {
            sources: vec![source],
            white_uv: 0.0,
            pink_uv: 0.0,
            line_uv: 0.0,
            n_trials: 5,
            ..SepSynthConfig::default()
        }
    }

    fn source(channel: usize, snr_db: f64) -> SepSource {
        SepSource {
            channel,
            polarity: 1.0,
            snr_db: Some(snr_db),
            amplitude_uv: None,
            latency_shift_ms: 0.0,
        }
    }

    #[test]
    fn noiseless_snr_matches_template_ratio() {
        let cfg = quiet(SepSource {
            snr_db: None,
            amplitude_uv: Some(10.0),
            ..source(4, 0.0)
        });
        let (rec, truth) = synth_sep_recording(&cfg).unwrap();
        let e = epochize(&rec, &[EventKind::StimulusTrigger], 70.0, 70.0).unwrap().epochs;
        let s = sep_snr(e.trace(2, 4), e.pre_samples, e.fs).unwrap();
        let want = truth.channels[4].snr_db;
        assert!((s - want).abs() < 1e-6 * want.abs(), "{s} vs {want}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = SepSynthConfig::default();
        let (a, _) = synth_sep_recording(&cfg).unwrap();
        let (b, _) = synth_sep_recording(&cfg).unwrap();
        assert_eq!(a, b);
        let (c, _) = synth_sep_recording(&SepSynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn planted_five_db_is_measured() {
        let cfg = SepSynthConfig {
            sources: vec![source(0, 5.0)],
            ..SepSynthConfig::default()
        };
        let (rec, truth) = synth_sep_recording(&cfg).unwrap();
        assert!((truth.channels[0].snr_db - 5.0).abs() < 1e-9);
        let e = epochize(&rec, &[EventKind::StimulusTrigger], 70.0, 70.0).unwrap().epochs;
        let v: Vec<f64> = (0..e.n_trials()).map(|t| sep_snr(e.trace(t, 0), e.pre_samples, e.fs).unwrap()).collect();
        assert!((median(&v) - 5.0).abs() < 0.5, "{}", median(&v));
    }

    #[test]
    fn responsive_channel_has_greatest_median() {
        let (rec, truth) = synth_sep_recording(&SepSynthConfig::default()).unwrap();
        let e = epochize(&rec, &[EventKind::StimulusTrigger], 70.0, 70.0).unwrap().epochs;
        let map = snr_map(&e, &rec.geometry).unwrap();
        let best = map.medians().into_iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        assert_eq!(best, 4);
        assert_eq!(truth.ranked()[0], 4);
    }

    #[test]
    fn config_violations() {
        let c = SepSynthConfig {
            n_trials: 0,
            ..SepSynthConfig::default()
        };
        assert!(synth_sep_recording(&c).is_err());
        let c = SepSynthConfig {
            sources: vec![source(9, 3.0)],
            ..SepSynthConfig::default()
        };
        assert!(synth_sep_recording(&c).is_err());
        let c = SepSynthConfig {
            white_uv: -1.0,
            ..SepSynthConfig::default()
        };
        assert!(synth_sep_recording(&c).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = SepSynthConfig::default();
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SepSynthConfig>(&s).unwrap(), cfg);
        let partial: SepSynthConfig = serde_json::from_str(r#"{"n_trials": 7, "sources": [{"channel": 1, "snr_db": 3}]}"#).unwrap();
        assert_eq!(partial.n_trials, 7);
        assert_eq!(partial.sources[0].polarity, 1.0);
    }
}
