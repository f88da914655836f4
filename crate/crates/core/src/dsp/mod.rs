//! Preprocessing: stimulus-artifact replacement, zero-phase filtering,
//! epoching, trial rejection and common average referencing.

mod artifact;
mod epoch;
mod filter;

pub use artifact::{remove_stimulus_artifact, remove_stimulus_artifact_with, Replacement, NATIVE_FS};
pub use epoch::{
    common_average_reference, epochize, ms_to_samples, quantile, reject_trials, EpochWarning, Epoched,
    StdPooling,
};
#[allow(unused_imports)]
pub(crate) use epoch::sample_std;
pub use filter::{zero_phase_filter, Biquad, FilterChain, FilterKind, FilterSpec, Sos, NOTCH_BANDWIDTH_HZ};
