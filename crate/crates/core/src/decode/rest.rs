use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{EpochSet, Label, Recording};

const ATTEMPTS: u64 = 64;

/// Free start positions as half-open `[a, b)` runs given taken intervals.
fn free_starts(taken: &[(usize, usize)], len: usize, n: usize) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut cursor = 0usize;
    for &(a, b) in taken {
        // A start s is free if [s, s+len) ends at or before a.
        if a >= cursor + len {
            runs.push((cursor, a - len + 1));
        }
        cursor = cursor.max(b);
    }
    if n >= cursor + len {
        runs.push((cursor, n - len + 1));
    }
    runs
}

fn max_feasible(taken: &[(usize, usize)], len: usize, n: usize) -> usize {
    free_starts(taken, len, n).iter().map(|&(a, b)| (b - a - 1) / len + 1).sum()
}

fn try_place(movement: &[(usize, usize)], len: usize, n: usize, count: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let mut taken = movement.to_vec();
    let mut starts = Vec::with_capacity(count);
    for _ in 0..count {
        taken.sort_unstable();
        let runs = free_starts(&taken, len, n);
        let total: usize = runs.iter().map(|(a, b)| b - a).sum();
        if total == 0 {
            return None;
        }
        let mut pick = rng.random_range(0..total);
        let s = runs
            .iter()
            .find_map(|&(a, b)| {
                if pick < b - a {
                    Some(a + pick)
                } else {
                    pick -= b - a;
                    None
                }
            })
            .expect("pick within total");
        taken.push((s, s + len));
        starts.push(s);
    }
    starts.sort_unstable();
    Some(starts)
}

/// Samples `count` rest epochs the same shape as `movement`, placed
/// uniformly over start positions that overlap neither a movement epoch nor
/// another rest epoch.
pub fn sample_rest_epochs(recording: &Recording, movement: &EpochSet, count: usize, seed: u64) -> Result<EpochSet> {
    if recording.n_channels() != movement.n_channels() {
        return Err(Error::invalid("recording and epochs differ in channel count"));
    }
    let pre = movement.pre_samples;
    let len = movement.window_len();
    let n = recording.n_samples();
    let mut taken: Vec<(usize, usize)> = movement
        .onsets
        .iter()
        .map(|&t| {
            let s = t.saturating_sub(pre);
            (s, (s + len).min(n))
        })
        .collect();
    taken.sort_unstable();
    let mut out = movement.empty_like();
    if count == 0 {
        return Ok(out);
    }
    let feasible = max_feasible(&taken, len, n);
    if count > feasible {
        return Err(Error::Insufficient(format!(
            "requested {count} rest epochs but at most {feasible} fit outside the movement epochs"
        )));
    }
    let starts = (0..ATTEMPTS)
        .find_map(|a| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(a);
            try_place(&taken, len, n, count, &mut rng)
        })
        .ok_or_else(|| {
            Error::Insufficient(format!(
                "could not place {count} non-overlapping rest epochs (at most {feasible} fit)"
            ))
        })?;
    let mut data = Vec::with_capacity(count * movement.n_channels() * len);
    for &s in &starts {
        for ch in &recording.samples {
            data.extend_from_slice(&ch[s..s + len]);
        }
    }
    out = EpochSet::new(
        data,
        count,
        movement.n_channels(),
        pre,
        movement.post_samples,
        movement.fs,
        vec![Label::Rest; count],
        starts.iter().map(|s| s + pre).collect(),
    )?;
    out.rejected_channels = movement.rejected_channels.clone();
    Ok(out)
}
