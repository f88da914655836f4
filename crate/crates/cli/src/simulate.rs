use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;

use sepkit::io::save_recording;
use sepkit::synth::{synth_behaviour_dataset, synth_sep_recording, BehaviourSynthConfig, SepSynthConfig};

use crate::{read_json, write_json, EncodingArg};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Kind {
    Sep,
    Behaviour,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
pub enum Preset {
    /// Fifteen planted gamma and high-gamma coordinates.
    #[default]
    Default,
    /// High gamma on channels 1-2 for left, 5-6 for right.
    Lateralized,
    /// No modulation.
    Null,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    kind: Kind,
    /// JSON generator config; its seed is replaced by `--seed`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Behaviour preset used when no config is given.
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Recording sidecar to write; ground truth goes to `<stem>.truth.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = EncodingArg::F32le)]
    encoding: EncodingArg,
}

pub fn truth_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.truth.json"))
}

pub fn run(args: Args) -> Result<()> {
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let truth_file = truth_path(&args.out);
    match args.kind {
        Kind::Sep => {
            let mut cfg: SepSynthConfig = match &args.config {
                Some(p) => read_json(p)?,
                None => SepSynthConfig::default(),
            };
            cfg.seed = args.seed;
            let (rec, truth) = synth_sep_recording(&cfg)?;
            save_recording(&rec, &args.out, args.encoding.into())?;
            write_json(&truth_file, &serde_json::json!({ "config": cfg, "truth": truth }))?;
        }
        Kind::Behaviour => {
            let cfg = match &args.config {
                Some(p) => read_json(p)?,
                None => match args.preset {
                    Preset::Default => BehaviourSynthConfig::default(),
                    Preset::Lateralized => BehaviourSynthConfig::lateralized(),
                    Preset::Null => BehaviourSynthConfig::null(),
                },
            }
            .with_seed(args.seed);
            let (rec, truth) = synth_behaviour_dataset(&cfg)?;
            save_recording(&rec, &args.out, args.encoding.into())?;
            write_json(&truth_file, &serde_json::json!({ "config": cfg, "truth": truth }))?;
        }
    }
    println!(
        "{}",
        serde_json::json!({ "recording": args.out.display().to_string(), "truth": truth_file.display().to_string() })
    );
    Ok(())
}
