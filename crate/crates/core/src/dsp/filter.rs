//! Butterworth band-pass / band-stop design in second-order sections and
//! forward-backward (zero-phase) application.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Recording;

/// −3 dB width of every notch, in Hz.
pub const NOTCH_BANDWIDTH_HZ: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterKind {
    Bandpass { lo_hz: f64, hi_hz: f64 },
    Notch { center_hz: f64, bandwidth_hz: f64 },
}

/// A recursive filter of a given total (digital) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(flatten)]
    pub kind: FilterKind,
    pub order: usize,
}

impl FilterSpec {
    pub fn bandpass(lo_hz: f64, hi_hz: f64, order: usize) -> Self {
        Self {
            kind: FilterKind::Bandpass { lo_hz, hi_hz },
            order,
        }
    }

    pub fn notch(center_hz: f64, order: usize) -> Self {
        Self {
            kind: FilterKind::Notch {
                center_hz,
                bandwidth_hz: NOTCH_BANDWIDTH_HZ,
            },
            order,
        }
    }

    fn check(&self, fs: f64) -> Result<()> {
        if self.order < 2 || self.order % 2 != 0 {
            return Err(Error::invalid(format!(
                "filter order must be even and >= 2, got {}",
                self.order
            )));
        }
        let nyq = fs / 2.0;
        let inside = |f: f64| f > 0.0 && f < nyq;
        let ok = match self.kind {
            FilterKind::Bandpass { lo_hz, hi_hz } => inside(lo_hz) && inside(hi_hz) && lo_hz < hi_hz,
            FilterKind::Notch {
                center_hz,
                bandwidth_hz,
            } => {
                bandwidth_hz > 0.0
                    && inside(center_hz - bandwidth_hz / 2.0)
                    && inside(center_hz + bandwidth_hz / 2.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "filter corners {:?} not inside (0, {nyq}) Hz",
                self.kind
            )))
        }
    }

    /// Designs the digital filter for sampling rate `fs`.
    pub fn design(&self, fs: f64) -> Result<Sos> {
        self.check(fs)?;
        let n = self.order / 2;
        let prewarp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let proto = butter_prototype(n);
        let fs2 = Complex64::new(2.0 * fs, 0.0);
        let bilinear = |s: Complex64| (fs2 + s) / (fs2 - s);

        let (poles, zero, reference) = match self.kind {
            FilterKind::Bandpass { lo_hz, hi_hz } => {
                let w1 = prewarp(lo_hz);
                let w2 = prewarp(hi_hz);
                let wo = (w1 * w2).sqrt();
                let bw = w2 - w1;
                let poles = proto
                    .iter()
                    .flat_map(|&p| {
                        let pl = p * (bw / 2.0);
                        let d = (pl * pl - wo * wo).sqrt();
                        [pl + d, pl - d]
                    })
                    .map(bilinear)
                    .collect::<Vec<_>>();
                // Unity gain at the centre frequency.
                let theta = 2.0 * (wo / (2.0 * fs)).atan();
                (poles, SectionZeros::DcAndNyquist, Complex64::from_polar(1.0, theta))
            }
            FilterKind::Notch {
                center_hz,
                bandwidth_hz,
            } => {
                let wo = prewarp(center_hz);
                let bw = prewarp(center_hz + bandwidth_hz / 2.0) - prewarp(center_hz - bandwidth_hz / 2.0);
                let poles = proto
                    .iter()
                    .flat_map(|&p| {
                        let ph = (bw / 2.0) / p;
                        let d = (ph * ph - wo * wo).sqrt();
                        [ph + d, ph - d]
                    })
                    .map(bilinear)
                    .collect::<Vec<_>>();
                let z0 = bilinear(Complex64::new(0.0, wo));
                (poles, SectionZeros::Conjugate(z0.arg()), Complex64::new(1.0, 0.0))
            }
        };

        let radius = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        if radius >= 1.0 {
            return Err(Error::UnstableFilter { radius });
        }

        let sections = pair_poles(&poles)
            .into_iter()
            .map(|a| {
                let b = zero.coefficients();
                Biquad::normalized(b, a, reference)
            })
            .collect();
        Ok(Sos { sections })
    }
}

#[derive(Debug, Clone, Copy)]
enum SectionZeros {
    /// Zeros at z = 1 and z = −1.
    DcAndNyquist,
    /// Zeros at exp(±iθ).
    Conjugate(f64),
}

impl SectionZeros {
    fn coefficients(self) -> [f64; 3] {
        match self {
            SectionZeros::DcAndNyquist => [1.0, 0.0, -1.0],
            SectionZeros::Conjugate(theta) => [1.0, -2.0 * theta.cos(), 1.0],
        }
    }
}

fn butter_prototype(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

/// Groups poles into denominator polynomials `[a1, a2]` (a0 = 1).
fn pair_poles(poles: &[Complex64]) -> Vec<[f64; 2]> {
    const REAL_TOL: f64 = 1e-12;
    let mut out = Vec::new();
    let mut real = Vec::new();
    for p in poles {
        if p.im > REAL_TOL {
            out.push([-2.0 * p.re, p.norm_sqr()]);
        } else if p.im.abs() <= REAL_TOL {
            real.push(p.re);
        }
    }
    real.sort_by(|a, b| a.total_cmp(b));
    for pair in real.chunks(2) {
        match *pair {
            [p1, p2] => out.push([-(p1 + p2), p1 * p2]),
            [p1] => out.push([-p1, 0.0]),
            _ => unreachable!(),
        }
    }
    out
}

/// One second-order section, transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 2], at: Complex64) -> Self {
        let raw = Biquad { b, a };
        let g = 1.0 / raw.response(at).norm();
        Biquad {
            b: [b[0] * g, b[1] * g, b[2] * g],
            a,
        }
    }

    /// Transfer function evaluated at `z`.
    pub fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let num = self.b[0] + zi * (self.b[1] + zi * self.b[2]);
        let den = 1.0 + zi * (self.a[0] + zi * self.a[1]);
        num / den
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes a constant input of 1 pass without transient.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        [g - self.b[0], self.b[2] - self.a[1] * g]
    }

    fn run(&self, x: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let xin = *v;
            let y = b0 * xin + z[0];
            z[0] = b1 * xin - a1 * y + z[1];
            z[1] = b2 * xin - a2 * y;
            *v = y;
        }
    }
}

/// Cascade of biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

impl Sos {
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Single-pass magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, fs: f64) -> f64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * freq_hz / fs);
        self.sections.iter().map(|s| s.response(z)).product::<Complex64>().norm()
    }

    /// Causal filtering starting from the steady state for input level `x[0]`.
    fn run_steady(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let mut level = x0;
        for s in &self.sections {
            let zi = s.step_state();
            s.run(x, [zi[0] * level, zi[1] * level]);
            level *= s.dc_gain();
        }
    }

    /// Forward-backward filtering with odd reflection padding of `3 × order`
    /// samples at each end.
    pub fn filtfilt(&self, signal: &[f64]) -> Result<Vec<f64>> {
        let pad = 3 * self.order();
        let n = signal.len();
        if n <= pad {
            return Err(Error::SignalTooShort { needed: pad, got: n });
        }
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let first = signal[0];
        let last = signal[n - 1];
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
        ext.extend_from_slice(signal);
        ext.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

        self.run_steady(&mut ext);
        ext.reverse();
        self.run_steady(&mut ext);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }
}

/// Zero-phase application of a single filter.
pub fn zero_phase_filter(signal: &[f64], spec: &FilterSpec, fs: f64) -> Result<Vec<f64>> {
    spec.design(fs)?.filtfilt(signal)
}

/// Filters applied one after another, each forward-backward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterChain {
    pub filters: Vec<FilterSpec>,
}

impl FilterChain {
    /// Notches at 50/100/150 Hz then a 10–190 Hz band-pass, all order 20.
    pub fn sep_default() -> Self {
        Self {
            filters: vec![
                FilterSpec::notch(50.0, 20),
                FilterSpec::notch(100.0, 20),
                FilterSpec::notch(150.0, 20),
                FilterSpec::bandpass(10.0, 190.0, 20),
            ],
        }
    }

    /// 2–200 Hz band-pass, order 20.
    pub fn behaviour_default() -> Self {
        Self {
            filters: vec![FilterSpec::bandpass(2.0, 200.0, 20)],
        }
    }

    pub fn design(&self, fs: f64) -> Result<Vec<Sos>> {
        self.filters.iter().map(|f| f.design(fs)).collect()
    }

    /// Combined single-pass magnitude; the zero-phase response is its square.
    pub fn magnitude(&self, freq_hz: f64, fs: f64) -> Result<f64> {
        Ok(self.design(fs)?.iter().map(|s| s.magnitude(freq_hz, fs)).product())
    }

    pub fn apply(&self, signal: &[f64], fs: f64) -> Result<Vec<f64>> {
        let designed = self.design(fs)?;
        apply_designed(&designed, signal)
    }

    /// Filters every channel of a recording.
    pub fn apply_recording(&self, recording: &Recording) -> Result<Recording> {
        let designed = self.design(recording.fs)?;
        let samples = recording
            .samples
            .par_iter()
            .map(|ch| apply_designed(&designed, ch))
            .collect::<Result<Vec<_>>>()?;
        Ok(Recording {
            samples,
            ..recording.clone()
        })
    }
}

fn apply_designed(designed: &[Sos], signal: &[f64]) -> Result<Vec<f64>> {
    let mut out = signal.to_vec();
    for sos in designed {
        out = sos.filtfilt(&out)?;
    }
    Ok(out)
}
