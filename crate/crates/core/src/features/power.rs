use std::ops::Range;

use rayon::prelude::*;

use super::cwt::{Cwt, Spectrogram, WaveletParams};
use crate::error::{Error, Result};
use crate::model::{BandSet, EpochSet, FeatureTensor, Window};

/// Seven 100 ms windows tiling `[−200, +500)` ms.
pub fn default_windows() -> Vec<Window> {
    Window::tiling(-200.0, 500.0, 100.0)
}

/// Sample index of a boundary `ms` from onset; floored so adjacent windows
/// share edges.
fn boundary(ms: f64, pre_samples: usize, fs: f64) -> i64 {
    pre_samples as i64 + (ms * fs / 1000.0).floor() as i64
}

pub(crate) fn window_ranges(windows: &[Window], pre_samples: usize, len: usize, fs: f64) -> Result<Vec<Range<usize>>> {
    windows
        .iter()
        .map(|w| {
            let a = boundary(w.start_ms, pre_samples, fs);
            let b = boundary(w.end_ms, pre_samples, fs);
            if a < 0 || b > len as i64 {
                return Err(Error::invalid(format!(
                    "window [{}, {}) ms falls outside the epoch",
                    w.start_ms, w.end_ms
                )));
            }
            if b <= a {
                return Err(Error::invalid(format!("window [{}, {}) ms is empty", w.start_ms, w.end_ms)));
            }
            Ok(a as usize..b as usize)
        })
        .collect()
}

/// Frequency rows in each band: `[lo, hi)`, the last band closed at `hi`.
pub(crate) fn band_rows(freqs: &[f64], bands: &BandSet) -> Result<Vec<Range<usize>>> {
    let n = bands.len();
    bands
        .bands()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let inside = |f: f64| f >= b.lo_hz && (f < b.hi_hz || (i + 1 == n && f <= b.hi_hz));
            let start = freqs.iter().position(|&f| inside(f));
            let end = freqs.iter().rposition(|&f| inside(f));
            match (start, end) {
                (Some(s), Some(e)) => Ok(s..e + 1),
                _ => Err(Error::invalid(format!(
                    "band {} [{}, {}] Hz holds no wavelet frequency",
                    b.name, b.lo_hz, b.hi_hz
                ))),
            }
        })
        .collect()
}

/// `log10` of mean power over each band's frequencies and each window's
/// samples, ordered `(channel, band, window)`.
pub fn band_window_power(
    spectrograms: &[Spectrogram],
    bands: &BandSet,
    windows: &[Window],
    pre_samples: usize,
) -> Result<Vec<f64>> {
    let first = spectrograms
        .first()
        .ok_or_else(|| Error::invalid("no spectrograms"))?;
    let rows = band_rows(&first.freqs_hz, bands)?;
    let cols = window_ranges(windows, pre_samples, first.n_samples, first.fs)?;
    let mut out = Vec::with_capacity(spectrograms.len() * rows.len() * cols.len());
    for s in spectrograms {
        if s.freqs_hz != first.freqs_hz || s.n_samples != first.n_samples {
            return Err(Error::invalid("spectrograms disagree on their axes"));
        }
        for r in &rows {
            for c in &cols {
                let mut acc = 0.0;
                for f in r.clone() {
                    acc += s.row(f)[c.clone()].iter().sum::<f64>();
                }
                let mean = acc / (r.len() * c.len()) as f64;
                out.push(mean.max(f64::MIN_POSITIVE).log10());
            }
        }
    }
    Ok(out)
}

/// Band-window log-power of every accepted trial on every active channel.
pub fn extract_features(
    epochs: &EpochSet,
    bands: &BandSet,
    windows: &[Window],
    params: WaveletParams,
) -> Result<FeatureTensor> {
    let channels = epochs.active_channels();
    if channels.is_empty() {
        return Err(Error::invalid("no active channels"));
    }
    let trials = epochs.accepted_trials();
    let cwt = Cwt::new(epochs.window_len(), epochs.fs, (bands.lowest(), bands.highest()), params)?;
    band_rows(cwt.freqs_hz(), bands)?;
    window_ranges(windows, epochs.pre_samples, epochs.window_len(), epochs.fs)?;
    let rows = trials
        .par_iter()
        .map(|&t| {
            let specs = channels
                .iter()
                .map(|&c| cwt.transform(epochs.trace(t, c)))
                .collect::<Result<Vec<_>>>()?;
            band_window_power(&specs, bands, windows, epochs.pre_samples)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureTensor::new(
        rows.into_iter().flatten().collect(),
        trials.len(),
        channels,
        bands.bands().iter().map(|b| b.name.clone()).collect(),
        windows.to_vec(),
    )
}
