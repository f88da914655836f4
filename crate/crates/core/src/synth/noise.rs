use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Amplitude weight `1/√f` of FFT bin `k` in an `l`-point transform; zero at DC.
fn pink_weight(k: usize, l: usize, fs: f64) -> f64 {
    let kk = k.min(l - k);
    if kk == 0 {
        0.0
    } else {
        1.0 / (kk as f64 * fs / l as f64).sqrt()
    }
}

/// `|Σ_{n<N} e^{iωn}|²`.
fn dirichlet(n: usize, omega: f64) -> f64 {
    let s = (omega / 2.0).sin();
    if s.abs() < 1e-300 {
        (n * n) as f64
    } else {
        let num = (n as f64 * omega / 2.0).sin();
        num * num / (s * s)
    }
}

/// Expected unbiased sample variance, over an `n`-sample window, of a unit
/// variance component at angular frequency `omega` (rad/sample).
fn window_factor(n: usize, omega: f64) -> f64 {
    let nf = n as f64;
    (nf - dirichlet(n, omega) / nf) / (nf - 1.0)
}

pub(crate) fn white(n: usize, rms: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rms * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Spectrally shaped white noise with power ∝ 1/f, scaled to `rms`.
pub(crate) fn pink(n: usize, fs: f64, rms: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if rms == 0.0 || n == 0 {
        return vec![0.0; n];
    }
    let l = n.next_power_of_two();
    let mut buf: Vec<Complex64> = (0..l)
        .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(l).process(&mut buf);
    let total: f64 = (0..l).map(|k| pink_weight(k, l, fs).powi(2)).sum::<f64>() / l as f64;
    let scale = rms / total.sqrt() / l as f64;
    for (k, b) in buf.iter_mut().enumerate() {
        *b *= pink_weight(k, l, fs) * scale;
    }
    planner.plan_fft_inverse(l).process(&mut buf);
    buf.truncate(n);
    buf.into_iter().map(|c| c.re).collect()
}

/// Expected window variance of [`pink`] noise generated for a signal of
/// `n_total` samples.
pub(crate) fn pink_window_variance(n_window: usize, n_total: usize, fs: f64, rms: f64) -> f64 {
    if rms == 0.0 {
        return 0.0;
    }
    let l = n_total.next_power_of_two();
    let mut total = 0.0;
    let mut windowed = 0.0;
    for k in 1..l {
        let w2 = pink_weight(k, l, fs).powi(2);
        total += w2;
        windowed += w2 * window_factor(n_window, 2.0 * PI * k as f64 / l as f64);
    }
    rms * rms * windowed / total
}

/// Share of [`pink`] noise variance falling in `[lo_hz, hi_hz)`.
pub(crate) fn pink_band_variance(lo_hz: f64, hi_hz: f64, n_total: usize, fs: f64, rms: f64) -> f64 {
    if rms == 0.0 {
        return 0.0;
    }
    let l = n_total.next_power_of_two();
    let mut total = 0.0;
    let mut band = 0.0;
    for k in 1..l {
        let w2 = pink_weight(k, l, fs).powi(2);
        total += w2;
        let f = k.min(l - k) as f64 * fs / l as f64;
        if f >= lo_hz && f < hi_hz {
            band += w2;
        }
    }
    rms * rms * band / total
}

/// Expected window variance of `amp · sin(2π f t + φ)` with uniform phase.
pub(crate) fn line_window_variance(n_window: usize, freq_hz: f64, fs: f64, amp: f64) -> f64 {
    0.5 * amp * amp * window_factor(n_window, 2.0 * PI * freq_hz / fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::variance;
    use rand::SeedableRng;

    #[test]
    fn pink_has_requested_rms_and_window_variance() {
        let fs = 4800.0;
        let n = 1 << 17;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = pink(n, fs, 3.0, &mut rng);
        let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((var / 9.0 - 1.0).abs() < 0.1, "{var}");
        let w = 288;
        let mut acc = 0.0;
        let count = n / w;
        for i in 0..count {
            acc += variance(&x[i * w..(i + 1) * w]);
        }
        let expected = pink_window_variance(w, n, fs, 3.0);
        assert!((acc / count as f64 / expected - 1.0).abs() < 0.1, "{} vs {expected}", acc / count as f64);
        assert!(expected < 9.0);
        let parts: f64 = [(0.0, 30.0), (30.0, 200.0), (200.0, 2401.0)]
            .iter()
            .map(|&(a, b)| pink_band_variance(a, b, n, fs, 3.0))
            .sum();
        assert!((parts - 9.0).abs() < 1e-9);
        // Equal power per octave.
        let o1 = pink_band_variance(50.0, 100.0, n, fs, 1.0);
        let o2 = pink_band_variance(100.0, 200.0, n, fs, 1.0);
        assert!((o1 / o2 - 1.0).abs() < 0.01);
    }

    #[test]
    fn line_variance_over_whole_periods() {
        // 288 samples at 4800 Hz hold exactly three 50 Hz periods.
        let v = line_window_variance(288, 50.0, 4800.0, 2.0);
        assert!((v - 2.0 * 288.0 / 287.0).abs() < 1e-9);
        let mut acc = 0.0;
        for p in 0..360 {
            let phi = p as f64 * PI / 180.0;
            let x: Vec<f64> = (0..100).map(|i| 2.0 * (2.0 * PI * 50.0 * i as f64 / 4800.0 + phi).sin()).collect();
            acc += variance(&x);
        }
        assert!((acc / 360.0 - line_window_variance(100, 50.0, 4800.0, 2.0)).abs() < 1e-9);
    }
}
