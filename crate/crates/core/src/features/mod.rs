//! Wavelet band-power features and mutual-information ranking.

mod cwt;
mod mi;
mod power;

pub use cwt::{cwt_spectrogram, frequency_grid, Cwt, Spectrogram, WaveletParams};
pub use mi::{mi_discrete_continuous, rank_and_select, FeatureRanking, RankedFeature, DEFAULT_K};
pub use power::{band_window_power, default_windows, extract_features};
