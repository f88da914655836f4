//! Adapter for the public CSV exports. Columns are matched by name: an
//! optional time column, an optional trigger or marker column, an optional
//! stimulus-current column, and every remaining numeric column is a channel.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ArrayGeometry, Event, EventKind, Recording};

const TIME_COLUMNS: &[&str] = &["time", "t", "time_s", "time (s)", "timestamp", "seconds"];
const TIME_MS_COLUMNS: &[&str] = &["time_ms", "time (ms)", "ms"];
const TRIGGER_COLUMNS: &[&str] = &["trigger", "trig", "stim", "stimulus", "marker", "event", "events", "ttl"];
const CURRENT_COLUMNS: &[&str] = &["current", "current_ma", "current (ma)", "amplitude_ma"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FigshareOptions {
    /// Overrides the rate inferred from the time column.
    pub fs: Option<f64>,
    /// Grid shape; square channel counts default to a square grid, others to a row.
    pub shape: Option<(usize, usize)>,
    pub pitch_mm: f64,
    pub diameter_mm: f64,
    /// Marker codes for movements; any other non-zero code is a stimulus trigger.
    pub left_code: Option<f64>,
    pub right_code: Option<f64>,
}

impl Default for FigshareOptions {
    fn default() -> Self {
        Self {
            fs: None,
            shape: None,
            pitch_mm: 5.0,
            diameter_mm: 3.0,
            left_code: None,
            right_code: None,
        }
    }
}

fn find(names: &[String], wanted: &[&str]) -> Option<usize> {
    names.iter().position(|n| wanted.contains(&n.to_ascii_lowercase().as_str()))
}

fn err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {msg}", path.display()))
}

pub fn import_figshare_csv(path: &Path, opts: &FigshareOptions) -> Result<Recording> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| err(path, e))?;
    let names: Vec<String> = r.headers().map_err(|e| err(path, e))?.iter().map(str::to_string).collect();
    let time_s = find(&names, TIME_COLUMNS);
    let time_ms = find(&names, TIME_MS_COLUMNS);
    let trig = find(&names, TRIGGER_COLUMNS);
    let current = find(&names, CURRENT_COLUMNS);
    let special = [time_s, time_ms, trig, current];
    let chans: Vec<usize> = (0..names.len()).filter(|i| !special.contains(&Some(*i))).collect();
    if chans.is_empty() {
        return Err(err(path, "no channel columns"));
    }
    let mut cols = vec![Vec::new(); names.len()];
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| err(path, format!("row {row}: {e}")))?;
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = if cell.is_empty() && Some(c) == trig {
                0.0
            } else {
                cell.parse()
                    .map_err(|_| err(path, format!("row {row}, column {} ({}): cannot parse {cell:?}", c + 1, names[c])))?
            };
            if !v.is_finite() {
                return Err(err(path, format!("row {row}, column {} ({}): non-finite value {cell}", c + 1, names[c])));
            }
            cols[c].push(v);
        }
    }
    let n = cols[0].len();
    if n < 2 {
        return Err(err(path, "fewer than two samples"));
    }
    let fs = match (opts.fs, time_s.or(time_ms)) {
        (Some(fs), _) => fs,
        (None, Some(tc)) => {
            let t = &cols[tc];
            let span = t[n - 1] - t[0];
            let per_second = if time_s.is_some() { 1.0 } else { 1000.0 };
            (n - 1) as f64 * per_second / span
        }
        (None, None) => return Err(err(path, "no time column; pass the sampling rate explicitly")),
    };
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(err(path, format!("sampling rate {fs} is not positive")));
    }
    let mut events = Vec::new();
    if let Some(tc) = trig {
        let codes = &cols[tc];
        let mut prev = 0.0;
        for (i, &code) in codes.iter().enumerate() {
            if code != 0.0 && code != prev {
                let kind = if Some(code) == opts.left_code {
                    EventKind::MoveLeft
                } else if Some(code) == opts.right_code {
                    EventKind::MoveRight
                } else {
                    EventKind::StimulusTrigger
                };
                events.push(Event {
                    current_ma: current.map(|cc| cols[cc][i]).filter(|_| kind == EventKind::StimulusTrigger),
                    ..Event::new(i, kind)
                });
            }
            prev = code;
        }
    }
    let n_ch = chans.len();
    let (rows, cc) = opts.shape.unwrap_or_else(|| {
        let s = (n_ch as f64).sqrt().round() as usize;
        if s * s == n_ch {
            (s, s)
        } else {
            (1, n_ch)
        }
    });
    if rows * cc != n_ch {
        return Err(err(path, format!("grid {rows}×{cc} does not hold {n_ch} channels")));
    }
    let channel_names: Vec<String> = chans.iter().map(|&c| names[c].replace(',', "_")).collect();
    let samples: Vec<Vec<f64>> = chans.iter().map(|&c| std::mem::take(&mut cols[c])).collect();
    let mut rec = Recording::new(samples, fs, ArrayGeometry::grid(rows, cc, opts.pitch_mm, opts.diameter_mm));
    rec.events = events;
    rec.meta.insert("channel_names".into(), channel_names.join(","));
    rec.meta.insert("imported_from".into(), path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    rec.ensure_valid()?;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn maps_columns_and_edges() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let mut text = String::from("Time,E1,E2,E3,E4,Stim,Current\n");
        for i in 0..20 {
            let stim = if i == 5 || i == 6 || i == 12 { 1 } else { 0 };
            text.push_str(&format!("{},{},{},{},{},{stim},2.5\n", i as f64 / 4800.0, i, -i, 0, 1));
        }
        fs::write(&p, text).unwrap();
        let r = import_figshare_csv(&p, &FigshareOptions::default()).unwrap();
        assert_eq!(r.n_channels(), 4);
        assert_eq!(r.geometry.shape(), (2, 2));
        assert!((r.fs - 4800.0).abs() < 1e-6);
        let idx: Vec<usize> = r.events.iter().map(|e| e.sample_index).collect();
        assert_eq!(idx, vec![5, 12]);
        assert_eq!(r.events[0].current_ma, Some(2.5));
        assert_eq!(r.samples[1][3], -3.0);
    }

    #[test]
    fn movement_codes_and_explicit_rate() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "a,b,marker\n0,0,0\n1,1,1\n2,2,0\n3,3,2\n4,4,0\n").unwrap();
        let opts = FigshareOptions {
            fs: Some(1024.0),
            left_code: Some(1.0),
            right_code: Some(2.0),
            ..FigshareOptions::default()
        };
        let r = import_figshare_csv(&p, &opts).unwrap();
        assert_eq!(r.events.iter().map(|e| e.kind).collect::<Vec<_>>(), vec![EventKind::MoveLeft, EventKind::MoveRight]);
        assert_eq!(r.geometry.shape(), (1, 2));
        assert!(import_figshare_csv(&p, &FigshareOptions::default()).is_err());
    }

    #[test]
    fn bad_cell_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        fs::write(&p, "time,x\n0,1\n0.001,nan\n").unwrap();
        let e = import_figshare_csv(&p, &FigshareOptions::default()).unwrap_err().to_string();
        assert!(e.contains("row 3, column 2"), "{e}");
    }
}
