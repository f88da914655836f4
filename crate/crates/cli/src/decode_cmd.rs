use std::path::PathBuf;

use anyhow::{Context, Result};

use sepkit::decode::{run_decode, DecodeConfig, FoldMode};
use sepkit::io::{load_any, render_report, Report};
use sepkit::model::BandSet;

use crate::{prepare_out, read_json, to_json, write_json, CsvArgs};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Recording sidecar (.json) or CSV export.
    recording: PathBuf,
    /// JSON decoding config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `default` or `name:lo-hi,...`.
    #[arg(long)]
    bands: Option<String>,
    /// Number of features kept by mutual information.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    /// 2 for left/right, 3 adds rest epochs.
    #[arg(long)]
    classes: Option<usize>,
    /// Only windows ending at or before movement onset.
    #[arg(long)]
    pre_move_only: bool,
    /// Shuffle trials across folds instead of contiguous blocks.
    #[arg(long)]
    shuffled_folds: bool,
    /// Permute labels before splitting (null control).
    #[arg(long)]
    permute_labels: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    csv: CsvArgs,
    /// Directory for the JSON report and confusion-matrix SVGs.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Args {
    fn config(&self) -> Result<DecodeConfig> {
        let mut cfg: DecodeConfig = match &self.config {
            Some(p) => read_json(p)?,
            None => DecodeConfig::default(),
        };
        if let Some(b) = &self.bands {
            cfg.bands = BandSet::parse(b).context("--bands")?;
        }
        if let Some(t) = self.top {
            cfg.top_m = t;
        }
        if let Some(f) = self.folds {
            cfg.folds = f;
        }
        if let Some(c) = self.classes {
            cfg.n_classes = c;
        }
        cfg.pre_move_only |= self.pre_move_only;
        cfg.permute_labels |= self.permute_labels;
        if self.shuffled_folds {
            cfg.fold_mode = FoldMode::Shuffled;
        }
        Ok(cfg)
    }
}

pub fn run(args: Args) -> Result<()> {
    let cfg = args.config()?;
    let rec = load_any(&args.recording, &args.csv.options())?;
    let report = run_decode(&rec, &cfg, args.seed).with_context(|| format!("decoding {}", args.recording.display()))?;
    if report.dropped_events > 0 {
        eprintln!("warning: {} movement events too close to the recording edges were dropped", report.dropped_events);
    }
    if let Some(dir) = prepare_out(&args.out)? {
        write_json(&dir.join("decode_report.json"), &report)?;
        render_report(Report::Confusion(&report.holdout), &dir.join("confusion_holdout.svg"))?;
        render_report(Report::Confusion(&report.cv.pooled), &dir.join("confusion_cv.svg"))?;
    }
    print!("{}", to_json(&report)?);
    Ok(())
}
