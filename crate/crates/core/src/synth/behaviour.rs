use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{pink, pink_band_variance, white};
use crate::error::{Error, Result};
use crate::features::default_windows;
use crate::model::{ArrayGeometry, BandSet, Event, EventKind, FeatureCoord, Label, Recording, Window};

const BURST_TONES: usize = 8;
const BAND_MARGIN: f64 = 1.2;
const TUKEY_ALPHA: f64 = 0.5;

/// Extra band power planted on one (channel, band, window) for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub channel: usize,
    pub band: String,
    /// Index into the config's windows.
    pub window: usize,
    pub class: Label,
    /// Burst variance as a multiple of the background variance in the band.
    pub power_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviourSynthConfig {
    pub n_channels: usize,
    pub fs: f64,
    pub trials_per_class: usize,
    pub spacing_ms: f64,
    pub jitter_ms: f64,
    pub lead_ms: f64,
    pub bands: BandSet,
    pub windows: Vec<Window>,
    pub white_uv: f64,
    pub pink_uv: f64,
    pub pitch_mm: f64,
    pub diameter_mm: f64,
    pub modulations: Vec<Modulation>,
    pub seed: u64,
}

fn plant(spec: &[(usize, &str, usize)], power_ratio: f64) -> Vec<Modulation> {
    spec.iter()
        .enumerate()
        .map(|(i, &(channel, band, window))| Modulation {
            channel,
            band: band.to_string(),
            window,
            class: if i % 2 == 0 { Label::Left } else { Label::Right },
            power_ratio,
        })
        .collect()
}

impl Default for BehaviourSynthConfig {
    /// Six channels with fifteen informative coordinates.
    fn default() -> Self {
        let g = "gamma";
        let h = "high_gamma";
        Self {
            n_channels: 6,
            fs: 1024.0,
            trials_per_class: 120,
            spacing_ms: 1500.0,
            jitter_ms: 200.0,
            lead_ms: 1000.0,
            bands: BandSet::standard(),
            windows: default_windows(),
            white_uv: 1.0,
            pink_uv: 4.0,
            pitch_mm: 5.0,
            diameter_mm: 3.0,
            modulations: plant(
                &[
                    (0, g, 1),
                    (0, h, 3),
                    (1, g, 4),
                    (1, h, 1),
                    (1, h, 5),
                    (2, g, 2),
                    (2, h, 4),
                    (3, g, 5),
                    (3, h, 2),
                    (4, g, 3),
                    (4, h, 1),
                    (4, h, 5),
                    (5, g, 1),
                    (5, g, 4),
                    (5, h, 3),
                ],
                2.0,
            ),
            seed: 0,
        }
    }
}

impl BehaviourSynthConfig {
    /// Left movements raise high gamma on channels 1–2 after onset, right
    /// movements on channels 5–6.
    pub fn lateralized() -> Self {
        let post: Vec<usize> = (2..7).collect();
        let mut modulations = Vec::new();
        for (class, chans) in [(Label::Left, [0, 1]), (Label::Right, [4, 5])] {
            for &channel in &chans {
                for &window in &post {
                    modulations.push(Modulation {
                        channel,
                        band: "high_gamma".into(),
                        window,
                        class,
                        power_ratio: 3.0,
                    });
                }
            }
        }
        Self {
            modulations,
            ..Self::default()
        }
    }

    pub fn null() -> Self {
        Self {
            modulations: Vec::new(),
            ..Self::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(format!("behaviour synth config: {m}")));
        if self.n_channels == 0 {
            return bad("at least one channel required".into());
        }
        if !(self.fs > 0.0) {
            return bad(format!("sampling rate {} must be positive", self.fs));
        }
        if self.trials_per_class < 5 {
            return bad(format!("{} trials per class is too few", self.trials_per_class));
        }
        if self.windows.is_empty() {
            return bad("no windows".into());
        }
        let start = self.windows.iter().map(|w| w.start_ms).fold(f64::INFINITY, f64::min);
        let end = self.windows.iter().map(|w| w.end_ms).fold(f64::NEG_INFINITY, f64::max);
        if self.lead_ms + self.jitter_ms.abs() < -start {
            return bad("lead too short for the earliest window".into());
        }
        if self.spacing_ms - 2.0 * self.jitter_ms.abs() < end - start {
            return bad(format!("spacing {} ms lets epochs overlap", self.spacing_ms));
        }
        if self.bands.highest() >= self.fs / 2.0 {
            return bad("bands reach Nyquist".into());
        }
        for (name, v) in [("white_uv", self.white_uv), ("pink_uv", self.pink_uv)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a non-negative amplitude"));
            }
        }
        if self.white_uv == 0.0 && self.pink_uv == 0.0 && !self.modulations.is_empty() {
            return bad("modulations are relative to a noise floor, which is zero".into());
        }
        for m in &self.modulations {
            if m.channel >= self.n_channels {
                return bad(format!("modulation channel {} outside {} channels", m.channel, self.n_channels));
            }
            if !self.bands.bands().iter().any(|b| b.name == m.band) {
                return bad(format!("unknown band {:?}", m.band));
            }
            if m.window >= self.windows.len() {
                return bad(format!("window {} outside {} windows", m.window, self.windows.len()));
            }
            if !matches!(m.class, Label::Left | Label::Right) {
                return bad(format!("modulation class {:?} is not a movement", m.class));
            }
            if !(m.power_ratio >= 0.0 && m.power_ratio.is_finite()) {
                return bad(format!("power ratio {} must be finite and non-negative", m.power_ratio));
            }
        }
        Ok(())
    }

    fn band_index(&self, name: &str) -> usize {
        self.bands.bands().iter().position(|b| b.name == name).expect("checked")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviourTruth {
    pub seed: u64,
    pub fs: f64,
    /// Movement onsets in time order.
    pub onsets: Vec<usize>,
    pub labels: Vec<Label>,
    /// Distinct planted coordinates, channel being the recording channel.
    pub informative: Vec<FeatureCoord>,
    pub modulations: Vec<Modulation>,
}

fn tukey(n: usize) -> Vec<f64> {
    let edge = TUKEY_ALPHA * (n.saturating_sub(1)) as f64 / 2.0;
    (0..n)
        .map(|i| {
            let x = i as f64;
            let last = (n - 1) as f64;
            let d = x.min(last - x);
            if d >= edge {
                1.0
            } else {
                0.5 * (1.0 - (PI * d / edge).cos())
            }
        })
        .collect()
}

/// Seeded left/right movement recording with class-conditional band-power
/// bursts at the planted coordinates.
pub fn synth_behaviour_dataset(cfg: &BehaviourSynthConfig) -> Result<(Recording, BehaviourTruth)> {
    cfg.check()?;
    let fs = cfg.fs;
    let samples_of = |ms: f64| (ms * fs / 1000.0).round() as i64;

    let mut sched = ChaCha8Rng::seed_from_u64(cfg.seed);
    sched.set_stream(u64::MAX);
    let mut labels: Vec<Label> = [Label::Left, Label::Right]
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, cfg.trials_per_class))
        .collect();
    labels.shuffle(&mut sched);
    let onsets: Vec<usize> = (0..labels.len())
        .map(|i| {
            let jitter = if cfg.jitter_ms > 0.0 {
                sched.random_range(-cfg.jitter_ms..cfg.jitter_ms)
            } else {
                0.0
            };
            samples_of(cfg.lead_ms + i as f64 * cfg.spacing_ms + jitter) as usize
        })
        .collect();
    let n = (samples_of(cfg.lead_ms * 2.0 + labels.len() as f64 * cfg.spacing_ms)) as usize;

    let samples: Vec<Vec<f64>> = (0..cfg.n_channels)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let mut x = white(n, cfg.white_uv, &mut rng);
            for (v, p) in x.iter_mut().zip(pink(n, fs, cfg.pink_uv, &mut rng)) {
                *v += p;
            }
            for m in cfg.modulations.iter().filter(|m| m.channel == c) {
                let band = &cfg.bands.bands()[cfg.band_index(&m.band)];
                let bg = cfg.white_uv.powi(2) * 2.0 * (band.hi_hz - band.lo_hz) / fs
                    + pink_band_variance(band.lo_hz, band.hi_hz, n, fs, cfg.pink_uv);
                let w = cfg.windows[m.window];
                let (f_lo, f_hi) = (band.lo_hz * BAND_MARGIN, band.hi_hz / BAND_MARGIN);
                for (&t, &l) in onsets.iter().zip(&labels) {
                    if l != m.class {
                        continue;
                    }
                    let a = (t as i64 + (w.start_ms * fs / 1000.0).floor() as i64).max(0) as usize;
                    let b = ((t as i64 + (w.end_ms * fs / 1000.0).floor() as i64).max(0) as usize).min(n);
                    if b <= a + 1 {
                        continue;
                    }
                    let taper = tukey(b - a);
                    let mean_w2 = taper.iter().map(|v| v * v).sum::<f64>() / taper.len() as f64;
                    let amp = (2.0 * m.power_ratio * bg / (BURST_TONES as f64 * mean_w2)).sqrt();
                    for _ in 0..BURST_TONES {
                        let f = rng.random_range(f_lo..f_hi);
                        let phase = rng.random::<f64>() * 2.0 * PI;
                        let om = 2.0 * PI * f / fs;
                        for (j, (v, tw)) in x[a..b].iter_mut().zip(&taper).enumerate() {
                            *v += amp * tw * (om * j as f64 + phase).sin();
                        }
                    }
                }
            }
            x
        })
        .collect();

    let geometry = ArrayGeometry::linear(cfg.n_channels, cfg.pitch_mm, cfg.diameter_mm);
    let mut rec = Recording::new(samples, fs, geometry);
    rec.events = onsets
        .iter()
        .zip(&labels)
        .map(|(&t, &l)| Event::new(t, if l == Label::Left { EventKind::MoveLeft } else { EventKind::MoveRight }))
        .collect();
    rec.meta.insert("generator".into(), "synth_behaviour".into());
    rec.meta.insert("seed".into(), cfg.seed.to_string());

    let mut informative: Vec<FeatureCoord> = cfg
        .modulations
        .iter()
        .filter(|m| m.power_ratio > 0.0)
        .map(|m| FeatureCoord {
            channel: m.channel,
            band: cfg.band_index(&m.band),
            window: m.window,
        })
        .collect();
    informative.sort_unstable();
    informative.dedup();
    let truth = BehaviourTruth {
        seed: cfg.seed,
        fs,
        onsets,
        labels,
        informative,
        modulations: cfg.modulations.clone(),
    };
    Ok((rec, truth))
}
