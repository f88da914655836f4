use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use walkdir::WalkDir;

use sepkit::dsp::StdPooling;
use sepkit::io::{load_any, read_header, render_report, Report};
use sepkit::model::Recording;
use sepkit::sep::{analyze as analyze_sep, compare_groups, CorrelationMap, GroupComparison, SepConfig, SessionStats, SnrMap};

use crate::{prepare_out, read_json, to_json, write_json, CsvArgs};

#[derive(clap::Args, Debug, Clone)]
pub struct SepOptions {
    /// JSON analysis config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trial-rejection percentile of the per-trial standard deviation.
    #[arg(long)]
    percentile: Option<f64>,
    /// Lag bound of the cross-correlation search.
    #[arg(long)]
    max_lag_ms: Option<f64>,
    /// One standard deviation per channel instead of pooled.
    #[arg(long)]
    per_channel_std: bool,
    /// Keep only triggers delivered at this current.
    #[arg(long)]
    current_ma: Option<f64>,
    /// Leave the stimulus artifact in place.
    #[arg(long)]
    skip_artifact: bool,
    /// Accepted for uniformity; SEP analysis has no random steps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    csv: CsvArgs,
}

impl SepOptions {
    fn config(&self) -> Result<SepConfig> {
        let mut cfg: SepConfig = match &self.config {
            Some(p) => read_json(p)?,
            None => SepConfig::default(),
        };
        if let Some(p) = self.percentile {
            cfg.percentile = p;
        }
        if let Some(l) = self.max_lag_ms {
            cfg.max_lag_ms = l;
        }
        if self.per_channel_std {
            cfg.pooling = StdPooling::PerChannel;
        }
        if self.current_ma.is_some() {
            cfg.current_ma = self.current_ma;
        }
        cfg.skip_artifact |= self.skip_artifact;
        Ok(cfg)
    }
}

#[derive(clap::Args, Debug)]
pub struct AnalyzeArgs {
    /// Recording sidecar (.json) or CSV export.
    recording: PathBuf,
    /// Channels to exclude, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    reject_channels: Vec<usize>,
    #[command(flatten)]
    opts: SepOptions,
    /// Directory for the JSON report and SVG figures.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SepReport<'a> {
    recording: String,
    seed: u64,
    config: &'a SepConfig,
    stats: &'a SessionStats,
    snr: &'a SnrMap,
    correlation: Option<&'a CorrelationMap>,
    warnings: &'a [String],
}

fn with_rejections(mut rec: Recording, one_based: &[usize]) -> Result<Recording> {
    for &c in one_based {
        if c == 0 || c > rec.n_channels() {
            bail!("--reject-channels: channel {c} outside 1..={}", rec.n_channels());
        }
        rec.geometry.rejected.insert(c - 1);
    }
    Ok(rec)
}

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let cfg = args.opts.config()?;
    let rec = load_any(&args.recording, &args.opts.csv.options())?;
    let rec = with_rejections(rec, &args.reject_channels)?;
    let a = analyze_sep(&rec, &cfg).with_context(|| format!("analysing {}", args.recording.display()))?;
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    let report = SepReport {
        recording: args.recording.display().to_string(),
        seed: args.opts.seed,
        config: &cfg,
        stats: &a.stats,
        snr: &a.snr,
        correlation: a.correlation.as_ref(),
        warnings: &a.warnings,
    };
    if let Some(dir) = prepare_out(&args.out)? {
        write_json(&dir.join("sep_report.json"), &report)?;
        render_report(Report::Snr(&a.snr), &dir.join("snr.svg"))?;
        if let Some(c) = &a.correlation {
            render_report(Report::Correlation(c), &dir.join("correlation.svg"))?;
        }
        render_report(
            Report::Traces {
                averages: &a.averages,
                fs: a.epochs.fs,
                pre_samples: a.epochs.pre_samples,
            },
            &dir.join("traces.svg"),
        )?;
    }
    print!("{}", to_json(&report)?);
    Ok(())
}

#[derive(clap::Args, Debug)]
pub struct CompareArgs {
    /// One directory of recordings per array group.
    #[arg(required = true, num_args = 2..)]
    dirs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[command(flatten)]
    opts: SepOptions,
    /// File for the JSON comparison.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SessionEntry {
    recording: String,
    top2: Vec<usize>,
    top2_median_db: f64,
}

#[derive(Serialize)]
struct CompareReport {
    groups: Vec<(String, Vec<SessionEntry>)>,
    comparison: GroupComparison,
}

/// Recording files under `dir` in path order; JSON files that are not
/// recording sidecars are skipped.
pub fn recordings_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("listing {}", dir.display()))?;
        let p = entry.path();
        if !entry.file_type().is_file() {
            continue;
        }
        match p.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                // Payloads referenced by a sidecar are not recordings themselves.
                let sidecar = p.with_extension("json");
                if !sidecar.exists() {
                    out.push(p.to_path_buf());
                }
            }
            Some("json") if read_header(p).is_ok() => out.push(p.to_path_buf()),
            _ => {}
        }
    }
    Ok(out)
}

pub fn compare(args: CompareArgs) -> Result<()> {
    let cfg = args.opts.config()?;
    let mut groups = Vec::new();
    for dir in &args.dirs {
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        let mut sessions = Vec::new();
        for path in recordings_in(dir)? {
            let rec = load_any(&path, &args.opts.csv.options())?;
            let a = analyze_sep(&rec, &cfg).with_context(|| format!("analysing {}", path.display()))?;
            match a.stats.top2_median_db {
                Some(v) => sessions.push(SessionEntry {
                    recording: path.display().to_string(),
                    top2: a.stats.top2.iter().map(|c| c + 1).collect(),
                    top2_median_db: v,
                }),
                None => eprintln!("warning: {} has fewer than two usable channels; skipped", path.display()),
            }
        }
        if sessions.is_empty() {
            bail!("{} holds no usable recordings", dir.display());
        }
        groups.push((name, sessions));
    }
    let comparison = compare_groups(
        groups
            .iter()
            .map(|(n, s)| (n.clone(), s.iter().map(|e| e.top2_median_db).collect()))
            .collect(),
        args.alpha,
    )?;
    let report = CompareReport { groups, comparison };
    if let Some(p) = &args.out {
        write_json(p, &report)?;
    }
    print!("{}", to_json(&report)?);
    Ok(())
}
