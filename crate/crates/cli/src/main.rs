//! `medsal`: batch driver for medial-axis contour salience.
//!
//! Every subcommand takes image paths, directories or glob patterns, runs the
//! analysis per image on a worker pool and writes
//! `<stem>.<artifact>[.<measure>].<ext>` files plus `medsal.config.toml`, the
//! resolved configuration, into the output directory.
//!
//! Exit status: 0 when every image succeeded, 1 when some failed, 2 when all
//! failed, 3 for configuration errors.

mod config;
mod run;

use clap::{Parser, Subcommand};
use config::{Flags, RunConfig};
use medial_salience::output::BatchReport;
use rayon::prelude::*;
use run::Command;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "medsal", version, about = "Medial-axis salience for line drawings")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Sub {
    /// Skeleton overlay and branch graph JSON per image
    Skeletonize { inputs: Vec<String> },
    /// Salience PNGs, colormap renderings, stats and the salience cache
    Salience { inputs: Vec<String> },
    /// Top and bottom salience splits of the contour pixels
    Split { inputs: Vec<String> },
    /// Three-channel images built from contours and salience
    Compose { inputs: Vec<String> },
    /// Spoke-tip reconstruction of the contours
    Reconstruct { inputs: Vec<String> },
    /// Per-image stats and a batch report
    Stats { inputs: Vec<String> },
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_FAILED: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const IMAGE_EXTENSIONS: [&str; 5] = ["png", "pgm", "pbm", "ppm", "pnm"];

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Expands directories (their image files) and glob patterns. Plain paths are
/// kept as given so a missing file is reported as that image's failure.
fn expand_inputs(args: &[String]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for arg in args {
        let path = Path::new(arg);
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| format!("{arg}: {e}"))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_image(p))
                .collect();
            found.sort();
            out.extend(found);
        } else if arg.contains(['*', '?', '[']) {
            let mut found: Vec<PathBuf> = glob::glob(arg)
                .map_err(|e| format!("{arg}: {e}"))?
                .filter_map(Result::ok)
                .filter(|p| p.is_file())
                .collect();
            if found.is_empty() {
                log::warn!("{arg}: pattern matched no files");
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(path.to_path_buf());
        }
    }
    out.dedup();
    if out.is_empty() {
        return Err("no input images".into());
    }
    let mut stems: BTreeMap<String, &PathBuf> = BTreeMap::new();
    for p in &out {
        if let Some(prev) = stems.insert(run::stem_of(p), p) {
            return Err(format!("{} and {} would write the same output names", prev.display(), p.display()));
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let (command, inputs) = match cli.command {
        Sub::Skeletonize { inputs } => (Command::Skeletonize, inputs),
        Sub::Salience { inputs } => (Command::Salience, inputs),
        Sub::Split { inputs } => (Command::Split, inputs),
        Sub::Compose { inputs } => (Command::Compose, inputs),
        Sub::Reconstruct { inputs } => (Command::Reconstruct, inputs),
        Sub::Stats { inputs } => (Command::Stats, inputs),
    };
    match execute(command, &inputs, &cli.flags) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            log::error!("{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

/// Runs the batch. `Err` is a configuration error; otherwise the exit code.
fn execute(command: Command, args: &[String], flags: &Flags) -> Result<u8, String> {
    let inputs = expand_inputs(args)?;
    let cfg = RunConfig::resolve(command.name(), inputs, flags).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| format!("{}: {e}", cfg.output.display()))?;
    std::fs::write(cfg.output.join("medsal.config.toml"), cfg.to_toml())
        .map_err(|e| format!("{}: {e}", cfg.output.display()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| e.to_string())?;

    let results: Vec<_> = pool.install(|| {
        cfg.inputs
            .par_iter()
            .map(|path| {
                let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run::process(command, &cfg, path)))
                    .unwrap_or_else(|_| Err("internal error while processing".to_string()));
                (path, outcome)
            })
            .collect()
    });

    let mut failed = 0;
    let mut records = Vec::new();
    for (path, outcome) in results {
        match outcome {
            Ok(out) => {
                log::info!("{}: wrote {} files", path.display(), out.files.len());
                records.extend(out.record);
            }
            Err(e) => {
                failed += 1;
                log::error!("{}: {e}", path.display());
            }
        }
    }
    if matches!(command, Command::Stats | Command::Salience) && !records.is_empty() {
        let report = BatchReport::new(records);
        if let Err(e) = std::fs::write(cfg.output.join("batch.stats.json"), report.to_json()) {
            log::error!("batch report: {e}");
            failed = failed.max(1);
        }
    }
    let total = cfg.inputs.len();
    Ok(match failed {
        0 => 0,
        n if n == total => EXIT_FAILED,
        n => {
            log::warn!("{n} of {total} images failed");
            EXIT_PARTIAL
        }
    })
}
