//! Sub-scalp EEG analysis.
//!
//! Two pipelines share this crate:
//!
//! * SEP signal quality: artifact replacement, notch + band-pass filtering,
//!   epoching, trial rejection, common average referencing, then per-trial
//!   SNR, trial-averaged responses and lag-bounded cross-correlation maps
//!   ([`dsp`], [`sep`]).
//! * Motor-execution decoding: band-pass + CAR, wavelet band-power features,
//!   k-nearest-neighbour mutual-information ranking and LDA under
//!   chronological holdout and cross-validation ([`features`], [`decode`]).
//!
//! [`stats`] holds the tests used to report both; [`synth`] generates seeded
//! recordings with known ground truth; [`io`] reads and writes recordings and
//! renders SVG reports.

pub mod decode;
pub mod dsp;
pub mod error;
pub mod features;
pub mod io;
pub mod model;
pub mod sep;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
