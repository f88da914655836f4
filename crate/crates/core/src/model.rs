//! Domain types shared by both pipelines.
//!
//! Everything here is a plain value type: constructed once, then read. Units
//! are fixed at microvolts, milliseconds and hertz. Channel indices are
//! zero-based; renderers and the CLI add one when printing.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    StimulusTrigger,
    MoveLeft,
    MoveRight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub sample_index: usize,
    pub kind: EventKind,
    /// Stimulus current in mA, when the event is a trigger and it was logged.
    pub current_ma: Option<f64>,
}

impl Event {
    pub fn new(sample_index: usize, kind: EventKind) -> Self {
        Self {
            sample_index,
            kind,
            current_ma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub row: usize,
    pub col: usize,
}

/// Electrode layout on a regular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Centre-to-centre distance between neighbouring grid positions (mm).
    pub pitch_mm: f64,
    pub positions: Vec<GridPos>,
    pub diameters_mm: Vec<f64>,
    /// Channels excluded from analysis (zero-based).
    pub rejected: BTreeSet<usize>,
}

impl ArrayGeometry {
    /// Row-major `rows × cols` grid with uniform electrode diameter.
    pub fn grid(rows: usize, cols: usize, pitch_mm: f64, diameter_mm: f64) -> Self {
        let positions = (0..rows)
            .flat_map(|row| (0..cols).map(move |col| GridPos { row, col }))
            .collect::<Vec<_>>();
        let diameters_mm = vec![diameter_mm; positions.len()];
        Self {
            pitch_mm,
            positions,
            diameters_mm,
            rejected: BTreeSet::new(),
        }
    }

    /// Single row of `n` electrodes; used when only channel count matters.
    pub fn linear(n: usize, pitch_mm: f64, diameter_mm: f64) -> Self {
        Self::grid(1, n, pitch_mm, diameter_mm)
    }

    pub fn n_channels(&self) -> usize {
        self.positions.len()
    }

    pub fn with_rejected(mut self, rejected: impl IntoIterator<Item = usize>) -> Self {
        self.rejected = rejected.into_iter().collect();
        self
    }

    pub fn is_rejected(&self, channel: usize) -> bool {
        self.rejected.contains(&channel)
    }

    /// Grid extent as `(rows, cols)`.
    pub fn shape(&self) -> (usize, usize) {
        let rows = self.positions.iter().map(|p| p.row + 1).max().unwrap_or(0);
        let cols = self.positions.iter().map(|p| p.col + 1).max().unwrap_or(0);
        (rows, cols)
    }

    fn violations(&self, out: &mut Vec<String>) {
        let mut seen = BTreeSet::new();
        for (i, p) in self.positions.iter().enumerate() {
            if !seen.insert(*p) {
                out.push(format!(
                    "geometry: channel {i} duplicates grid position ({}, {})",
                    p.row, p.col
                ));
            }
        }
        if self.diameters_mm.len() != self.positions.len() {
            out.push(format!(
                "geometry: {} diameters for {} positions",
                self.diameters_mm.len(),
                self.positions.len()
            ));
        }
        for (i, d) in self.diameters_mm.iter().enumerate() {
            if !(*d > 0.0) {
                out.push(format!("geometry: channel {i} has non-positive diameter {d}"));
            }
        }
        if !(self.pitch_mm > 0.0) {
            out.push(format!("geometry: non-positive pitch {}", self.pitch_mm));
        }
        for r in &self.rejected {
            if *r >= self.positions.len() {
                out.push(format!("geometry: rejected channel {r} out of range"));
            }
        }
    }
}

/// A continuous multichannel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    /// Potentials in µV, one vector per channel.
    pub samples: Vec<Vec<f64>>,
    pub fs: f64,
    pub events: Vec<Event>,
    pub geometry: ArrayGeometry,
    pub meta: BTreeMap<String, String>,
}

impl Recording {
    pub fn new(samples: Vec<Vec<f64>>, fs: f64, geometry: ArrayGeometry) -> Self {
        Self {
            samples,
            fs,
            events: Vec::new(),
            geometry,
            meta: BTreeMap::new(),
        }
    }

    pub fn n_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn events_of(&self, kinds: &[EventKind]) -> impl Iterator<Item = &Event> {
        let kinds = kinds.to_vec();
        self.events.iter().filter(move |e| kinds.contains(&e.kind))
    }

    /// Returns an error listing every violated invariant.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = validate(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(v.join("; ")))
        }
    }
}

/// Report-only invariant check. An empty list means the recording is well formed.
pub fn validate(recording: &Recording) -> Vec<String> {
    let mut out = Vec::new();
    if !(recording.fs > 0.0) || !recording.fs.is_finite() {
        out.push(format!("sampling rate must be positive, got {}", recording.fs));
    }
    let n = recording.n_samples();
    for (c, ch) in recording.samples.iter().enumerate() {
        if ch.len() != n {
            out.push(format!("channel {c} has {} samples, expected {n}", ch.len()));
        }
    }
    for (i, e) in recording.events.iter().enumerate() {
        if e.sample_index >= n {
            out.push(format!(
                "event {i} at sample {} outside [0, {n})",
                e.sample_index
            ));
        }
    }
    if recording.geometry.n_channels() != recording.n_channels() {
        out.push(format!(
            "geometry describes {} channels, recording has {}",
            recording.geometry.n_channels(),
            recording.n_channels()
        ));
    }
    recording.geometry.violations(&mut out);
    out
}

/// Class label attached to an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Stimulus,
    Left,
    Right,
    Rest,
}

impl Label {
    pub fn from_event(kind: EventKind) -> Self {
        match kind {
            EventKind::StimulusTrigger => Label::Stimulus,
            EventKind::MoveLeft => Label::Left,
            EventKind::MoveRight => Label::Right,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Stimulus => "stimulus",
            Label::Left => "left",
            Label::Right => "right",
            Label::Rest => "rest",
        }
    }
}

/// Event-aligned trial windows, stored flat as `(trial, channel, sample)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    data: Vec<f64>,
    n_trials: usize,
    n_channels: usize,
    pub pre_samples: usize,
    pub post_samples: usize,
    pub fs: f64,
    pub labels: Vec<Label>,
    pub accepted: Vec<bool>,
    /// Event sample index of each trial in the source recording.
    pub onsets: Vec<usize>,
    /// Channels excluded from referencing and pooled statistics.
    pub rejected_channels: BTreeSet<usize>,
}

impl EpochSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: Vec<f64>,
        n_trials: usize,
        n_channels: usize,
        pre_samples: usize,
        post_samples: usize,
        fs: f64,
        labels: Vec<Label>,
        onsets: Vec<usize>,
    ) -> Result<Self> {
        let len = pre_samples + post_samples;
        if data.len() != n_trials * n_channels * len {
            return Err(Error::invalid(format!(
                "epoch data length {} != {n_trials} trials × {n_channels} channels × {len} samples",
                data.len()
            )));
        }
        if labels.len() != n_trials || onsets.len() != n_trials {
            return Err(Error::invalid(format!(
                "{} labels and {} onsets for {n_trials} trials",
                labels.len(),
                onsets.len()
            )));
        }
        Ok(Self {
            data,
            n_trials,
            n_channels,
            pre_samples,
            post_samples,
            fs,
            labels,
            accepted: vec![true; n_trials],
            onsets,
            rejected_channels: BTreeSet::new(),
        })
    }

    pub fn empty_like(&self) -> Self {
        Self {
            data: Vec::new(),
            n_trials: 0,
            n_channels: self.n_channels,
            pre_samples: self.pre_samples,
            post_samples: self.post_samples,
            fs: self.fs,
            labels: Vec::new(),
            accepted: Vec::new(),
            onsets: Vec::new(),
            rejected_channels: self.rejected_channels.clone(),
        }
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn window_len(&self) -> usize {
        self.pre_samples + self.post_samples
    }

    pub fn trace(&self, trial: usize, channel: usize) -> &[f64] {
        let len = self.window_len();
        let start = (trial * self.n_channels + channel) * len;
        &self.data[start..start + len]
    }

    pub fn trace_mut(&mut self, trial: usize, channel: usize) -> &mut [f64] {
        let len = self.window_len();
        let start = (trial * self.n_channels + channel) * len;
        &mut self.data[start..start + len]
    }

    /// All channels of one trial, channel-major.
    pub fn trial(&self, trial: usize) -> &[f64] {
        let len = self.window_len() * self.n_channels;
        &self.data[trial * len..(trial + 1) * len]
    }

    pub fn trial_mut(&mut self, trial: usize) -> &mut [f64] {
        let len = self.window_len() * self.n_channels;
        &mut self.data[trial * len..(trial + 1) * len]
    }

    pub fn active_channels(&self) -> Vec<usize> {
        (0..self.n_channels)
            .filter(|c| !self.rejected_channels.contains(c))
            .collect()
    }

    pub fn accepted_trials(&self) -> Vec<usize> {
        (0..self.n_trials).filter(|&t| self.accepted[t]).collect()
    }

    /// Copy of the selected trials, in the given order.
    pub fn select(&self, trials: &[usize]) -> Self {
        let mut out = self.empty_like();
        for &t in trials {
            out.data.extend_from_slice(self.trial(t));
            out.labels.push(self.labels[t]);
            out.accepted.push(self.accepted[t]);
            out.onsets.push(self.onsets[t]);
        }
        out.n_trials = trials.len();
        out
    }

    /// Appends the trials of `other`; window shape and channel count must match.
    pub fn concat(&self, other: &EpochSet) -> Result<Self> {
        if other.n_trials == 0 {
            return Ok(self.clone());
        }
        if self.n_trials == 0 {
            return Ok(other.clone());
        }
        if self.n_channels != other.n_channels
            || self.pre_samples != other.pre_samples
            || self.post_samples != other.post_samples
        {
            return Err(Error::invalid("cannot concatenate epoch sets of different shape"));
        }
        let mut out = self.clone();
        out.data.extend_from_slice(&other.data);
        out.labels.extend_from_slice(&other.labels);
        out.accepted.extend_from_slice(&other.accepted);
        out.onsets.extend_from_slice(&other.onsets);
        out.n_trials += other.n_trials;
        Ok(out)
    }

    /// Trials reordered by onset; stable for equal onsets.
    pub fn sorted_chronologically(&self) -> Self {
        let mut order: Vec<usize> = (0..self.n_trials).collect();
        order.sort_by_key(|&t| self.onsets[t]);
        self.select(&order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

/// Ordered, non-degenerate frequency bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet(Vec<Band>);

impl BandSet {
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::invalid("band set is empty"));
        }
        for b in &bands {
            if !(b.lo_hz > 0.0 && b.lo_hz < b.hi_hz) {
                return Err(Error::invalid(format!(
                    "band {} has invalid edges [{}, {}]",
                    b.name, b.lo_hz, b.hi_hz
                )));
            }
        }
        for w in bands.windows(2) {
            if w[1].lo_hz < w[0].lo_hz || w[1].hi_hz < w[0].hi_hz {
                return Err(Error::invalid(format!(
                    "bands {} and {} are out of order",
                    w[0].name, w[1].name
                )));
            }
        }
        Ok(Self(bands))
    }

    /// theta, alpha, beta, gamma, high gamma.
    pub fn standard() -> Self {
        let b = |name: &str, lo_hz, hi_hz| Band {
            name: name.to_string(),
            lo_hz,
            hi_hz,
        };
        Self(vec![
            b("theta", 5.0, 8.0),
            b("alpha", 8.0, 12.0),
            b("beta", 12.0, 30.0),
            b("gamma", 30.0, 70.0),
            b("high_gamma", 70.0, 200.0),
        ])
    }

    /// Parses `name:lo-hi,name:lo-hi,...`, or `default` for the standard set.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec.trim() == "default" {
            return Ok(Self::standard());
        }
        let mut bands = Vec::new();
        for part in spec.split(',') {
            let (name, range) = part
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("band '{part}' is not name:lo-hi")))?;
            let (lo, hi) = range
                .split_once('-')
                .ok_or_else(|| Error::invalid(format!("band '{part}' is not name:lo-hi")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("band '{part}': bad number '{s}'")))
            };
            bands.push(Band {
                name: name.trim().to_string(),
                lo_hz: parse(lo)?,
                hi_hz: parse(hi)?,
            });
        }
        Self::new(bands)
    }

    pub fn bands(&self) -> &[Band] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lowest(&self) -> f64 {
        self.0.iter().map(|b| b.lo_hz).fold(f64::INFINITY, f64::min)
    }

    pub fn highest(&self) -> f64 {
        self.0.iter().map(|b| b.hi_hz).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Time window relative to event onset, `[start_ms, end_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start_ms: f64,
    pub end_ms: f64,
}

impl Window {
    pub fn new(start_ms: f64, end_ms: f64) -> Self {
        Self { start_ms, end_ms }
    }

    /// Contiguous windows of `width_ms` tiling `[start_ms, end_ms)`.
    pub fn tiling(start_ms: f64, end_ms: f64, width_ms: f64) -> Vec<Window> {
        let n = ((end_ms - start_ms) / width_ms).round() as usize;
        (0..n)
            .map(|i| {
                Window::new(
                    start_ms + i as f64 * width_ms,
                    start_ms + (i + 1) as f64 * width_ms,
                )
            })
            .collect()
    }
}

/// Coordinates of one feature inside a [`FeatureTensor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureCoord {
    pub channel: usize,
    pub band: usize,
    pub window: usize,
}

/// Log-power features laid out as `(trial, channel, band, window)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    values: Vec<f64>,
    n_trials: usize,
    pub channels: Vec<usize>,
    pub bands: Vec<String>,
    pub windows: Vec<Window>,
}

impl FeatureTensor {
    pub fn new(
        values: Vec<f64>,
        n_trials: usize,
        channels: Vec<usize>,
        bands: Vec<String>,
        windows: Vec<Window>,
    ) -> Result<Self> {
        let per_trial = channels.len() * bands.len() * windows.len();
        if values.len() != n_trials * per_trial {
            return Err(Error::invalid(format!(
                "feature values length {} != {n_trials} × {} × {} × {}",
                values.len(),
                channels.len(),
                bands.len(),
                windows.len()
            )));
        }
        Ok(Self {
            values,
            n_trials,
            channels,
            bands,
            windows,
        })
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn n_features(&self) -> usize {
        self.channels.len() * self.bands.len() * self.windows.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Flat feature index, lexicographic in (channel, band, window).
    pub fn index_of(&self, coord: FeatureCoord) -> usize {
        (coord.channel * self.bands.len() + coord.band) * self.windows.len() + coord.window
    }

    pub fn coord_of(&self, index: usize) -> FeatureCoord {
        let nw = self.windows.len();
        let nb = self.bands.len();
        FeatureCoord {
            channel: index / (nb * nw),
            band: (index / nw) % nb,
            window: index % nw,
        }
    }

    pub fn row(&self, trial: usize) -> &[f64] {
        let nf = self.n_features();
        &self.values[trial * nf..(trial + 1) * nf]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_trials).map(|t| self.row(t)[feature]).collect()
    }

    pub fn select_trials(&self, trials: &[usize]) -> Self {
        let values = trials.iter().flat_map(|&t| self.row(t).iter().copied()).collect();
        Self {
            values,
            n_trials: trials.len(),
            channels: self.channels.clone(),
            bands: self.bands.clone(),
            windows: self.windows.clone(),
        }
    }

    /// Keeps only the listed windows (by index), preserving order.
    pub fn restrict_windows(&self, keep: &[usize]) -> Result<Self> {
        if keep.iter().any(|&w| w >= self.windows.len()) {
            return Err(Error::invalid("window index out of range"));
        }
        let mut values = Vec::with_capacity(self.n_trials * self.channels.len() * self.bands.len() * keep.len());
        for t in 0..self.n_trials {
            let row = self.row(t);
            for c in 0..self.channels.len() {
                for b in 0..self.bands.len() {
                    for &w in keep {
                        values.push(row[self.index_of(FeatureCoord { channel: c, band: b, window: w })]);
                    }
                }
            }
        }
        Self::new(
            values,
            self.n_trials,
            self.channels.clone(),
            self.bands.clone(),
            keep.iter().map(|&w| self.windows[w]).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Label,
    pub support: usize,
    pub sensitivity: f64,
    pub sensitivity_p: f64,
    pub specificity: f64,
    pub specificity_p: f64,
}

/// Test-set evaluation: confusion matrix (rows = truth, columns = predicted)
/// plus one-vs-rest metrics and exact binomial p-values against chance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<Label>,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub accuracy_p: f64,
    pub n: usize,
    pub chance: f64,
}
