use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, ArrayGeometry, Event, Recording};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// Little-endian 32-bit floats, channel-major.
    F32le,
    /// One row per sample, one column per channel, header row of names.
    Csv,
}

impl Encoding {
    fn extension(self) -> &'static str {
        match self {
            Encoding::F32le => "f32",
            Encoding::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    pub encoding: Encoding,
    /// Relative to the header's directory.
    pub file: String,
}

/// JSON sidecar describing a recording payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingHeader {
    pub format_version: u32,
    pub fs: f64,
    pub units: String,
    pub channel_names: Vec<String>,
    pub n_samples: usize,
    pub geometry: ArrayGeometry,
    pub events: Vec<Event>,
    pub payload: Payload,
    pub provenance: BTreeMap<String, String>,
}

fn unit_scale(units: &str) -> Result<f64> {
    match units {
        "uV" | "µV" | "microvolt" => Ok(1.0),
        "mV" => Ok(1e3),
        "V" => Ok(1e6),
        other => Err(Error::Format(format!("unsupported units {other:?} (expected uV, mV or V)"))),
    }
}

pub fn default_channel_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("ch{i}")).collect()
}

fn format_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {msg}", path.display()))
}

/// Writes `<header_path>` and its payload next to it, named after the header
/// stem. Binary payloads store samples as f32.
pub fn save_recording(recording: &Recording, header_path: &Path, encoding: Encoding) -> Result<RecordingHeader> {
    recording.ensure_valid()?;
    let stem = header_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::invalid(format!("{} has no file name", header_path.display())))?;
    let file = format!("{stem}.{}", encoding.extension());
    let dir = header_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let names = match recording.meta.get("channel_names") {
        Some(s) if s.split(',').count() == recording.n_channels() => s.split(',').map(str::to_string).collect(),
        _ => default_channel_names(recording.n_channels()),
    };
    let provenance = recording
        .meta
        .iter()
        .filter(|(k, _)| k.as_str() != "channel_names")
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let header = RecordingHeader {
        format_version: FORMAT_VERSION,
        fs: recording.fs,
        units: "uV".into(),
        channel_names: names,
        n_samples: recording.n_samples(),
        geometry: recording.geometry.clone(),
        events: recording.events.clone(),
        payload: Payload { encoding, file },
        provenance,
    };
    let payload_path = dir.join(&header.payload.file);
    match encoding {
        Encoding::F32le => {
            let mut bytes = Vec::with_capacity(recording.n_channels() * recording.n_samples() * 4);
            for ch in &recording.samples {
                for &v in ch {
                    bytes.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            fs::write(&payload_path, bytes)?;
        }
        Encoding::Csv => {
            let mut w = csv::Writer::from_path(&payload_path).map_err(|e| format_err(&payload_path, e))?;
            w.write_record(&header.channel_names).map_err(|e| format_err(&payload_path, e))?;
            let mut row = Vec::with_capacity(recording.n_channels());
            for i in 0..recording.n_samples() {
                row.clear();
                row.extend(recording.samples.iter().map(|ch| ch[i].to_string()));
                w.write_record(&row).map_err(|e| format_err(&payload_path, e))?;
            }
            w.flush()?;
        }
    }
    fs::write(header_path, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(header)
}

pub fn read_header(header_path: &Path) -> Result<RecordingHeader> {
    let text = fs::read_to_string(header_path).map_err(|e| format_err(header_path, e))?;
    let header: RecordingHeader = serde_json::from_str(&text).map_err(|e| format_err(header_path, e))?;
    if header.format_version != FORMAT_VERSION {
        return Err(format_err(
            header_path,
            format!("format_version {} is not supported (expected {FORMAT_VERSION})", header.format_version),
        ));
    }
    if header.channel_names.len() != header.geometry.n_channels() {
        return Err(format_err(
            header_path,
            format!(
                "{} channel names but geometry describes {} channels",
                header.channel_names.len(),
                header.geometry.n_channels()
            ),
        ));
    }
    Ok(header)
}

fn read_f32(path: &Path, n_ch: usize, n: usize, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let bytes = fs::read(path).map_err(|e| format_err(path, e))?;
    let expected = n_ch * n * 4;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            format!(
                "payload holds {} bytes, expected {expected} ({n_ch} channels × {n} samples × 4 bytes)",
                bytes.len()
            ),
        ));
    }
    let mut out = Vec::with_capacity(n_ch);
    for (c, chunk) in bytes.chunks_exact(n * 4).enumerate() {
        let ch: Vec<f64> = chunk
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
            return Err(format_err(path, format!("non-finite sample {} in channel {} ({}) at sample {i}", ch[i], c + 1, names[c])));
        }
        out.push(ch);
    }
    Ok(out)
}

fn read_csv(path: &Path, n_ch: usize, n: usize, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| format_err(path, e))?.iter().map(|s| s.trim().to_string()).collect();
    if header != names {
        return Err(format_err(path, format!("CSV columns {header:?} do not match channel_names {names:?}")));
    }
    let mut out = vec![Vec::with_capacity(n); n_ch];
    for (i, rec) in r.records().enumerate() {
        // Row numbers count the header as row 1.
        let row = i + 2;
        let rec = rec.map_err(|e| format_err(path, format!("row {row}: {e}")))?;
        if rec.len() != n_ch {
            return Err(format_err(path, format!("row {row} has {} columns, expected {n_ch}", rec.len())));
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| format_err(path, format!("row {row}, column {} ({}): cannot parse {cell:?}", c + 1, names[c])))?;
            if !v.is_finite() {
                return Err(format_err(path, format!("row {row}, column {} ({}): non-finite value {cell}", c + 1, names[c])));
            }
            out[c].push(v);
        }
    }
    let got = out.first().map_or(0, Vec::len);
    if got != n {
        return Err(format_err(path, format!("payload holds {got} samples, header says {n}")));
    }
    Ok(out)
}

/// Loads a recording from its JSON sidecar; samples are returned in µV.
pub fn load_recording(header_path: &Path) -> Result<Recording> {
    let header = read_header(header_path)?;
    let scale = unit_scale(&header.units).map_err(|e| format_err(header_path, e))?;
    let dir: PathBuf = header_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let payload = dir.join(&header.payload.file);
    let n_ch = header.channel_names.len();
    let mut samples = match header.payload.encoding {
        Encoding::F32le => read_f32(&payload, n_ch, header.n_samples, &header.channel_names)?,
        Encoding::Csv => read_csv(&payload, n_ch, header.n_samples, &header.channel_names)?,
    };
    if scale != 1.0 {
        samples.iter_mut().flatten().for_each(|v| *v *= scale);
    }
    let mut rec = Recording::new(samples, header.fs, header.geometry);
    rec.events = header.events;
    rec.meta = header.provenance;
    if header.channel_names != default_channel_names(n_ch) {
        rec.meta.insert("channel_names".into(), header.channel_names.join(","));
    }
    let issues = validate(&rec);
    if !issues.is_empty() {
        return Err(format_err(header_path, issues.join("; ")));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventKind;

    fn sample() -> Recording {
        // Values exactly representable in f32.
        let samples = (0..4)
            .map(|c| (0..50).map(|i| ((i * 7 + c * 3) % 17) as f64 * 0.25 - 2.0).collect())
            .collect();
        let mut r = Recording::new(samples, 4800.0, ArrayGeometry::grid(2, 2, 3.0, 1.0).with_rejected([3]));
        r.events = vec![Event {
            current_ma: Some(2.5),
            ..Event::new(10, EventKind::StimulusTrigger)
        }];
        r.meta.insert("source".into(), "unit".into());
        r
    }

    #[test]
    fn round_trips_both_encodings() {
        let dir = tempfile::tempdir().unwrap();
        let rec = sample();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        save_recording(&rec, &a, Encoding::F32le).unwrap();
        save_recording(&rec, &b, Encoding::Csv).unwrap();
        let la = load_recording(&a).unwrap();
        let lb = load_recording(&b).unwrap();
        assert_eq!(la, rec);
        assert_eq!(la, lb);
    }

    #[test]
    fn csv_keeps_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = sample();
        rec.samples[0][3] = std::f64::consts::PI;
        let p = dir.path().join("x.json");
        save_recording(&rec, &p, Encoding::Csv).unwrap();
        assert_eq!(load_recording(&p).unwrap().samples[0][3].to_bits(), std::f64::consts::PI.to_bits());
    }

    #[test]
    fn truncated_payload_names_byte_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        save_recording(&sample(), &p, Encoding::F32le).unwrap();
        let bin = dir.path().join("t.f32");
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 4]).unwrap();
        let err = load_recording(&p).unwrap_err().to_string();
        assert!(err.contains("796 bytes") && err.contains("expected 800"), "{err}");
    }

    #[test]
    fn csv_nan_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.json");
        save_recording(&sample(), &p, Encoding::Csv).unwrap();
        let csv_path = dir.path().join("n.csv");
        let text = fs::read_to_string(&csv_path).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let mut cells: Vec<&str> = lines[5].split(',').collect();
        cells[2] = "NaN";
        lines[5] = cells.join(",");
        fs::write(&csv_path, lines.join("\n") + "\n").unwrap();
        let err = load_recording(&p).unwrap_err().to_string();
        assert!(err.contains("row 6, column 3"), "{err}");
    }

    #[test]
    fn missing_field_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save_recording(&sample(), &p, Encoding::F32le).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("fs");
        fs::write(&p, v.to_string()).unwrap();
        let err = load_recording(&p).unwrap_err().to_string();
        assert!(err.contains("missing field `fs`"), "{err}");
    }

    #[test]
    fn millivolts_are_scaled() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.json");
        save_recording(&sample(), &p, Encoding::F32le).unwrap();
        let text = fs::read_to_string(&p).unwrap().replace("\"uV\"", "\"mV\"");
        fs::write(&p, text).unwrap();
        let r = load_recording(&p).unwrap();
        assert_eq!(r.samples[1][1], sample().samples[1][1] * 1e3);
    }

    #[test]
    fn event_outside_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.json");
        let mut rec = sample();
        save_recording(&rec, &p, Encoding::F32le).unwrap();
        rec.events[0].sample_index = 500;
        let mut h = read_header(&p).unwrap();
        h.events = rec.events;
        fs::write(&p, serde_json::to_string(&h).unwrap()).unwrap();
        assert!(load_recording(&p).unwrap_err().to_string().contains("outside"));
    }
}
