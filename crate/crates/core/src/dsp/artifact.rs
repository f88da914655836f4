use crate::error::{Error, Result};
use crate::model::{EventKind, Recording};

/// Sampling rate the default replacement geometry is defined for.
pub const NATIVE_FS: f64 = 4800.0;

/// How many samples after each trigger are overwritten, and from how far back
/// the replacement block is copied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Replacement {
    pub length: usize,
    pub offset: usize,
}

impl Replacement {
    /// 32 samples copied from 96 samples earlier (one 50 Hz period at 4800 Hz).
    pub const NATIVE: Replacement = Replacement {
        length: 32,
        offset: 96,
    };

    /// Same geometry rescaled to another sampling rate: `round(fs/150)`
    /// samples copied from `round(fs/50)` samples earlier.
    pub fn scaled(fs: f64) -> Self {
        Replacement {
            length: (fs / 150.0).round() as usize,
            offset: (fs / 50.0).round() as usize,
        }
    }
}

/// Overwrites the samples after every stimulus trigger with the block one
/// line-noise period earlier, on every channel.
///
/// Only valid at 4800 Hz; use [`remove_stimulus_artifact_with`] to supply
/// an explicit geometry for other rates.
pub fn remove_stimulus_artifact(recording: &Recording) -> Result<Recording> {
    if recording.fs != NATIVE_FS {
        return Err(Error::invalid(format!(
            "artifact replacement is defined at {NATIVE_FS} Hz, recording is at {} Hz; pass an explicit replacement",
            recording.fs
        )));
    }
    remove_stimulus_artifact_with(recording, Replacement::NATIVE)
}

pub fn remove_stimulus_artifact_with(recording: &Recording, rep: Replacement) -> Result<Recording> {
    if rep.length > rep.offset {
        return Err(Error::invalid(format!(
            "replacement length {} exceeds offset {}",
            rep.length, rep.offset
        )));
    }
    let triggers: Vec<usize> = recording
        .events_of(&[EventKind::StimulusTrigger])
        .map(|e| e.sample_index)
        .collect();
    for (index, &t) in triggers.iter().enumerate() {
        if t < rep.offset {
            return Err(Error::TriggerTooEarly {
                index,
                sample: t,
                needed: rep.offset,
            });
        }
    }
    let samples = recording
        .samples
        .iter()
        .map(|src| {
            let mut out = src.clone();
            let n = src.len();
            for &t in &triggers {
                let end = (t + rep.length).min(n);
                let from = t - rep.offset;
                out[t..end].copy_from_slice(&src[from..from + (end - t)]);
            }
            out
        })
        .collect();
    Ok(Recording {
        samples,
        ..recording.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrayGeometry, Event};
    use std::f64::consts::PI;

    fn ramp(n: usize, channels: usize) -> Recording {
        let samples = (0..channels)
            .map(|c| (0..n).map(|i| (i * 10 + c) as f64).collect())
            .collect();
        Recording::new(samples, NATIVE_FS, ArrayGeometry::linear(channels, 5.0, 1.0))
    }

    #[test]
    fn block_is_copied_from_one_period_earlier() {
        let mut r = ramp(4000, 3);
        r.events.push(Event::new(1000, EventKind::StimulusTrigger));
        let out = remove_stimulus_artifact(&r).unwrap();
        for c in 0..3 {
            assert_eq!(&out.samples[c][1000..1032], &r.samples[c][904..936]);
            assert_eq!(&out.samples[c][..1000], &r.samples[c][..1000]);
            assert_eq!(&out.samples[c][1032..], &r.samples[c][1032..]);
        }
    }

    #[test]
    fn no_triggers_is_identity() {
        let mut r = ramp(500, 2);
        r.events.push(Event::new(200, EventKind::MoveLeft));
        assert_eq!(remove_stimulus_artifact(&r).unwrap(), r);
    }

    #[test]
    fn pure_line_noise_is_unchanged() {
        let n = 9600;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 / NATIVE_FS).sin()).collect();
        let mut r = Recording::new(vec![x.clone()], NATIVE_FS, ArrayGeometry::linear(1, 5.0, 1.0));
        for t in (500..n).step_by(1000) {
            r.events.push(Event::new(t, EventKind::StimulusTrigger));
        }
        let out = remove_stimulus_artifact(&r).unwrap();
        for (a, b) in out.samples[0].iter().zip(&x) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn early_trigger_is_an_error() {
        let mut r = ramp(500, 1);
        r.events.push(Event::new(200, EventKind::StimulusTrigger));
        r.events.push(Event::new(95, EventKind::StimulusTrigger));
        match remove_stimulus_artifact(&r) {
            Err(Error::TriggerTooEarly { index, sample, .. }) => {
                assert_eq!((index, sample), (1, 95));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_rates_need_explicit_geometry() {
        let mut r = ramp(3000, 1);
        r.fs = 1024.0;
        assert!(remove_stimulus_artifact(&r).is_err());
        let rep = Replacement::scaled(1024.0);
        assert_eq!(rep, Replacement { length: 7, offset: 20 });
        r.events.push(Event::new(100, EventKind::StimulusTrigger));
        let out = remove_stimulus_artifact_with(&r, rep).unwrap();
        assert_eq!(&out.samples[0][100..107], &r.samples[0][80..87]);
    }

    #[test]
    fn replacement_is_idempotent() {
        let mut r = ramp(5000, 2);
        for t in [300, 1500, 2700] {
            r.events.push(Event::new(t, EventKind::StimulusTrigger));
        }
        let once = remove_stimulus_artifact(&r).unwrap();
        let twice = remove_stimulus_artifact(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn block_is_clipped_at_recording_end() {
        let mut r = ramp(1010, 1);
        r.events.push(Event::new(1000, EventKind::StimulusTrigger));
        let out = remove_stimulus_artifact(&r).unwrap();
        assert_eq!(&out.samples[0][1000..], &r.samples[0][904..914]);
    }
}
