//! Seeded synthetic recordings with their planted ground truth.

mod behaviour;
mod noise;
mod sep;

pub use behaviour::{synth_behaviour_dataset, BehaviourSynthConfig, BehaviourTruth, Modulation};
pub use sep::{synth_sep_recording, ChannelTruth, Lobe, SepSource, SepSynthConfig, SepTruth};
