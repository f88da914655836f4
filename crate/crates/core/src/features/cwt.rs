use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveletParams {
    /// Morlet centre frequency in rad per unit scale.
    pub omega0: f64,
    pub voices_per_octave: usize,
}

impl Default for WaveletParams {
    fn default() -> Self {
        Self {
            omega0: 6.0,
            voices_per_octave: 12,
        }
    }
}

/// Wavelet power indexed `(frequency, sample)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub freqs_hz: Vec<f64>,
    pub n_samples: usize,
    pub fs: f64,
    pub params: WaveletParams,
    power: Vec<f64>,
}

impl Spectrogram {
    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn row(&self, freq: usize) -> &[f64] {
        &self.power[freq * self.n_samples..(freq + 1) * self.n_samples]
    }

    /// Frequency of maximum power at one sample.
    pub fn ridge(&self, sample: usize) -> f64 {
        let best = (0..self.freqs_hz.len())
            .max_by(|&a, &b| self.row(a)[sample].total_cmp(&self.row(b)[sample]))
            .unwrap_or(0);
        self.freqs_hz[best]
    }
}

/// Log-spaced grid `f_lo · 2^(j/voices)` up to `f_hi`.
pub fn frequency_grid(f_lo: f64, f_hi: f64, voices: usize) -> Vec<f64> {
    let n = ((f_hi / f_lo).log2() * voices as f64 + 1e-9).floor() as usize;
    (0..=n).map(|j| f_lo * 2f64.powf(j as f64 / voices as f64)).collect()
}

/// A CWT plan for one signal length, sampling rate and frequency grid.
/// Kernels and FFTs are built once and reused across traces.
pub struct Cwt {
    n: usize,
    n_fft: usize,
    fs: f64,
    params: WaveletParams,
    freqs: Vec<f64>,
    kernels: Vec<Vec<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Cwt {
    pub fn new(n: usize, fs: f64, f_range: (f64, f64), params: WaveletParams) -> Result<Self> {
        let (f_lo, f_hi) = f_range;
        if !(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0) {
            return Err(Error::invalid(format!(
                "frequency range [{f_lo}, {f_hi}] Hz must lie within (0, {}) Hz",
                fs / 2.0
            )));
        }
        if params.voices_per_octave == 0 || !(params.omega0 > 0.0) {
            return Err(Error::invalid("wavelet needs omega0 > 0 and at least one voice"));
        }
        let needed = (2.0 * fs / f_lo).ceil() as usize;
        if n < needed {
            return Err(Error::SignalTooShort { needed, got: n });
        }
        let n_fft = (2 * n).next_power_of_two();
        let freqs = frequency_grid(f_lo, f_hi, params.voices_per_octave);
        let kernels = freqs
            .iter()
            .map(|&f| {
                (0..n_fft)
                    .map(|k| {
                        if k == 0 || 2 * k >= n_fft {
                            return 0.0;
                        }
                        let fk = k as f64 * fs / n_fft as f64;
                        let x = params.omega0 * (fk / f - 1.0);
                        2.0 * (-0.5 * x * x).exp()
                    })
                    .collect()
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            n_fft,
            fs,
            params,
            freqs,
            kernels,
            forward: planner.plan_fft_forward(n_fft),
            inverse: planner.plan_fft_inverse(n_fft),
        })
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs
    }

    /// Mirror-pads the trace on both sides, zero-fills the rest.
    fn padded(&self, signal: &[f64]) -> (Vec<Complex64>, usize) {
        let n = self.n;
        let left = ((self.n_fft - n) / 2).min(n - 1);
        let right = (self.n_fft - n - left).min(n - 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_fft];
        for i in 0..left {
            buf[i].re = signal[left - i];
        }
        for (i, &v) in signal.iter().enumerate() {
            buf[left + i].re = v;
        }
        for i in 0..right {
            buf[left + n + i].re = signal[n - 2 - i];
        }
        (buf, left)
    }

    pub fn transform(&self, signal: &[f64]) -> Result<Spectrogram> {
        if signal.len() != self.n {
            return Err(Error::invalid(format!(
                "CWT planned for {} samples, got {}",
                self.n,
                signal.len()
            )));
        }
        let (mut spectrum, offset) = self.padded(signal);
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len())];
        self.forward.process_with_scratch(&mut spectrum, &mut scratch);
        let scale = 1.0 / self.n_fft as f64;
        let mut power = Vec::with_capacity(self.freqs.len() * self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_fft];
        for kernel in &self.kernels {
            for ((b, s), &k) in buf.iter_mut().zip(&spectrum).zip(kernel) {
                *b = s * k;
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            power.extend(buf[offset..offset + self.n].iter().map(|c| c.norm_sqr() * scale * scale));
        }
        Ok(Spectrogram {
            freqs_hz: self.freqs.clone(),
            n_samples: self.n,
            fs: self.fs,
            params: self.params,
            power,
        })
    }
}

/// Analytic Morlet power of one trace over `f_range` at the configured voice
/// density.
pub fn cwt_spectrogram(signal: &[f64], fs: f64, f_range: (f64, f64), params: WaveletParams) -> Result<Spectrogram> {
    Cwt::new(signal.len(), fs, f_range, params)?.transform(signal)
}
