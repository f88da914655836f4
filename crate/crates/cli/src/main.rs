mod decode_cmd;
mod selfcheck;
mod sep_cmd;
mod simulate;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use sepkit::io::FigshareOptions;

#[derive(Parser)]
#[command(name = "sepkit", version, about = "Sub-scalp EEG SEP quality and movement decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SEP signal-quality analysis.
    Sep {
        #[command(subcommand)]
        command: SepCommand,
    },
    /// Movement decoding.
    Decode {
        #[command(subcommand)]
        command: DecodeCommand,
    },
    /// Write a synthetic recording and its ground truth.
    Simulate(simulate::Args),
    /// Filter response, special-function and estimator checks.
    Selfcheck(selfcheck::Args),
}

#[derive(Subcommand)]
enum SepCommand {
    /// Per-channel SNR, correlation map and session statistics of one recording.
    Analyze(sep_cmd::AnalyzeArgs),
    /// ANOVA and Tukey HSD of top-2 median SNR across array groups.
    Compare(sep_cmd::CompareArgs),
}

#[derive(Subcommand)]
enum DecodeCommand {
    /// Features, selection, LDA, holdout and cross-validation on one recording.
    Run(decode_cmd::Args),
}

// Options for reading CSV exports; ignored for JSON sidecars.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct CsvArgs {
    /// Sampling rate of a CSV export without a time column.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Grid shape of a CSV export, as ROWSxCOLS.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<(usize, usize)>,
    /// Marker code of left movements in a CSV export.
    #[arg(long)]
    pub left_code: Option<f64>,
    /// Marker code of right movements in a CSV export.
    #[arg(long)]
    pub right_code: Option<f64>,
}

impl CsvArgs {
    pub fn options(&self) -> FigshareOptions {
        FigshareOptions {
            fs: self.fs,
            shape: self.shape,
            left_code: self.left_code,
            right_code: self.right_code,
            ..FigshareOptions::default()
        }
    }
}

fn parse_shape(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(r)?, p(c)?))
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
pub enum EncodingArg {
    #[default]
    F32le,
    Csv,
}

impl From<EncodingArg> for sepkit::io::Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::F32le => sepkit::io::Encoding::F32le,
            EncodingArg::Csv => sepkit::io::Encoding::Csv,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

pub fn prepare_out(dir: &Option<PathBuf>) -> Result<Option<&Path>> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
            Ok(Some(d.as_path()))
        }
        None => Ok(None),
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sep {
            command: SepCommand::Analyze(a),
        } => sep_cmd::analyze(a),
        Command::Sep {
            command: SepCommand::Compare(a),
        } => sep_cmd::compare(a),
        Command::Decode {
            command: DecodeCommand::Run(a),
        } => decode_cmd::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Selfcheck(a) => selfcheck::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
