use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use metastab_cli::config::{self, ExperimentConfig, Format, TaskConfig};
use metastab_cli::presets::Preset;
use metastab_cli::tasks;

#[derive(Parser)]
#[command(name = "metastab", version, about = "Metastability analysis of open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a TOML or JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the RNG seed of stochastic tasks.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data behind one of the figure presets.
    Figure {
        #[arg(value_enum)]
        name: Preset,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Repeat a run from the manifest it wrote.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct ReferenceRate {
    name: String,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    config: ExperimentConfig,
    seeds: Vec<u64>,
    reference_rate: ReferenceRate,
    files: Vec<String>,
}

fn apply_seed(config: &mut ExperimentConfig, seed: u64) {
    match &mut config.task {
        TaskConfig::Trajectories { seed: s, .. } => *s = seed,
        TaskConfig::FigurePreset { seed: s, .. } => *s = Some(seed),
        _ => {}
    }
}

fn execute(mut config: ExperimentConfig) -> Result<()> {
    config.validate()?;
    let out = tasks::run(&config)?;
    // record the default seed a preset fell back to
    if let (TaskConfig::FigurePreset { seed: seed @ None, .. }, Some(&used)) = (&mut config.task, out.seeds.first()) {
        *seed = Some(used);
    }
    let dir = config.output.dir.clone();
    let dir = dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    for doc in &out.documents {
        doc.write(dir, config.output.format)?;
        files.push(doc.file_name(config.output.format));
    }
    if let Some(readme) = &out.readme {
        fs::write(dir.join("README.md"), readme)?;
        files.push("README.md".into());
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config,
        seeds: out.seeds,
        reference_rate: ReferenceRate {
            name: out.reference.0.into(),
            value: out.reference.1,
        },
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST), text)?;
    for f in &manifest.files {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if manifest.tool != env!("CARGO_PKG_NAME") {
        bail!("{} was not written by this tool", path.display());
    }
    Ok(manifest)
}

fn main_inner(cli: Cli) -> Result<()> {
    let config = match cli.command {
        Command::Run { config, seed, format, out } => {
            let mut c = config::load(&config)?;
            if let Some(seed) = seed {
                apply_seed(&mut c, seed);
            }
            if let Some(format) = format {
                c.output.format = format;
            }
            if let Some(out) = out {
                c.output.dir = out;
            }
            c
        }
        Command::Figure { name, out, seed, format } => ExperimentConfig {
            model: None,
            task: TaskConfig::FigurePreset { name, seed },
            output: config::OutputConfig { dir: out, format },
        },
        Command::Rerun { manifest, out } => {
            let mut c = read_manifest(&manifest)?.config;
            if let Some(out) = out {
                c.output.dir = out;
            }
            c
        }
    };
    execute(config)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
