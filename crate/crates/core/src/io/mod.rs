//! Recording container, CSV import and SVG reports.

mod figshare;
mod recording;
mod svg;

use std::path::Path;

pub use figshare::{import_figshare_csv, FigshareOptions};
pub use recording::{
    default_channel_names, load_recording, read_header, save_recording, Encoding, Payload, RecordingHeader,
    FORMAT_VERSION,
};
pub use svg::{render, render_report, Report};

use crate::error::{Error, Result};
use crate::model::Recording;

/// Loads a JSON sidecar or imports a CSV export, by extension.
pub fn load_any(path: &Path, csv_options: &FigshareOptions) -> Result<Recording> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("json") => load_recording(path),
        Some("csv") => import_figshare_csv(path, csv_options),
        _ => Err(Error::Format(format!(
            "{}: expected a .json sidecar or a .csv export",
            path.display()
        ))),
    }
}
