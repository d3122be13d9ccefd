use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use metastab::lindblad::{LindbladModel, TimeGrid};
use metastab::models::{chiral_model, lambda_model, two_qubit_tpr_model, ChiralParams, LambdaParams};
use serde::{Deserialize, Serialize};

use crate::presets::Preset;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Lambda(LambdaConfig),
    TwoQubitTpr(LambdaConfig),
    Chiral(ChiralConfig),
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    #[serde(default = "one")]
    pub delta_v: f64,
    pub omega: f64,
    pub gamma: f64,
    #[serde(default)]
    pub gamma_v: f64,
    #[serde(default)]
    pub delta1: f64,
    #[serde(default)]
    pub delta2: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChiralConfig {
    pub omega: f64,
    pub delta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub delta_gamma: f64,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either explicit `values` or `start`/`stop`/`points` with a spacing.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Spectral,
    Adaptive,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PartitionChoice {
    Lambda,
    DarkState,
}

fn default_threshold() -> f64 {
    metastab::spectrum::DEFAULT_GAP_RATIO_THRESHOLD
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    Evolve {
        initial: String,
        times: TimesConfig,
        #[serde(default)]
        method: Method,
    },
    Spectrum {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    Steady {},
    Hae {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        partition: Option<PartitionChoice>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        times: Option<TimesConfig>,
    },
    Trajectories {
        initial: String,
        n_traj: usize,
        dt: f64,
        #[serde(default)]
        seed: u64,
        times: TimesConfig,
        /// Also write the first trajectory of the ensemble.
        #[serde(default)]
        single: bool,
    },
    Nojump {
        initial: String,
        times: TimesConfig,
    },
    Concurrence {
        initial: String,
        times: TimesConfig,
        #[serde(default)]
        method: Method,
    },
    FigurePreset {
        name: Preset,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_dir() -> PathBuf {
    PathBuf::from("metastab-out")
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            format: Format::Csv,
        }
    }
}

/// Reads a TOML config, or JSON when the file ends in `.json`.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("parsing {}: {e}", path.display()))?
    };
    config.validate()?;
    Ok(config)
}

fn non_negative(field: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        bail!("{field} must be a finite non-negative number, got {x}");
    }
    Ok(())
}

fn finite(field: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        bail!("{field} must be finite, got {x}");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.model {
            Some(ModelConfig::Lambda(p)) | Some(ModelConfig::TwoQubitTpr(p)) => {
                non_negative("model.gamma", p.gamma)?;
                non_negative("model.gamma_v", p.gamma_v)?;
                finite("model.omega", p.omega)?;
                finite("model.delta_v", p.delta_v)?;
                finite("model.delta1", p.delta1)?;
                finite("model.delta2", p.delta2)?;
            }
            Some(ModelConfig::Chiral(c)) => {
                non_negative("model.gamma", c.gamma)?;
                finite("model.omega", c.omega)?;
                finite("model.delta", c.delta)?;
                finite("model.delta_gamma", c.delta_gamma)?;
                if c.delta_gamma.abs() > c.gamma / 2.0 {
                    bail!("model.delta_gamma must satisfy |delta_gamma| <= gamma/2, got {}", c.delta_gamma);
                }
            }
            None => {
                if !matches!(self.task, TaskConfig::FigurePreset { .. }) {
                    bail!("model is required for this task");
                }
            }
        }
        match &self.task {
            TaskConfig::Evolve { times, .. }
            | TaskConfig::Nojump { times, .. }
            | TaskConfig::Concurrence { times, .. } => {
                times.grid("task.times")?;
            }
            TaskConfig::Trajectories { times, n_traj, dt, .. } => {
                let grid = times.grid("task.times")?;
                if grid.times()[0] != 0.0 {
                    bail!("task.times must start at 0 for trajectories");
                }
                if *n_traj == 0 {
                    bail!("task.n_traj must be at least 1");
                }
                if !(dt.is_finite() && *dt > 0.0) {
                    bail!("task.dt must be positive, got {dt}");
                }
            }
            TaskConfig::Hae { times: Some(times), initial, .. } => {
                times.grid("task.times")?;
                if initial.is_none() {
                    bail!("task.initial is required when task.times is given");
                }
            }
            TaskConfig::Spectrum { threshold } => {
                if !(threshold.is_finite() && *threshold > 1.0) {
                    bail!("task.threshold must be greater than 1, got {threshold}");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&ModelConfig> {
        self.model.as_ref().context("model is required for this task")
    }
}

impl TimesConfig {
    pub fn grid(&self, field: &str) -> Result<TimeGrid> {
        let grid = match (&self.values, self.start, self.stop, self.points) {
            (Some(values), None, None, None) => TimeGrid::new(values.clone()),
            (None, Some(start), Some(stop), Some(points)) => match self.spacing {
                Spacing::Linear => TimeGrid::linspace(start, stop, points),
                Spacing::Log => TimeGrid::logspace(start, stop, points),
            },
            _ => bail!("{field} needs either `values` or all of `start`, `stop`, `points`"),
        };
        grid.with_context(|| format!("invalid {field}"))
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<LindbladModel> {
        Ok(match self {
            ModelConfig::Lambda(p) => lambda_model(&p.params()?)?,
            ModelConfig::TwoQubitTpr(p) => two_qubit_tpr_model(&p.params()?)?,
            ModelConfig::Chiral(c) => chiral_model(&c.params()?)?,
        })
    }

    /// Rate that makes outputs dimensionless: `|Δ_V|` for the Λ family and
    /// `Γ` for the chiral pair.
    pub fn reference_rate(&self) -> (&'static str, f64) {
        match self {
            ModelConfig::Lambda(p) | ModelConfig::TwoQubitTpr(p) if p.delta_v != 0.0 => ("delta_v", p.delta_v.abs()),
            ModelConfig::Lambda(_) | ModelConfig::TwoQubitTpr(_) => ("unit", 1.0),
            ModelConfig::Chiral(c) if c.gamma > 0.0 => ("gamma", c.gamma),
            ModelConfig::Chiral(_) => ("unit", 1.0),
        }
    }
}

impl LambdaConfig {
    pub fn params(&self) -> Result<LambdaParams> {
        Ok(LambdaParams::new(self.delta1, self.delta2, self.delta_v, self.omega, self.gamma, self.gamma_v)?)
    }
}

impl ChiralConfig {
    pub fn params(&self) -> Result<ChiralParams> {
        Ok(ChiralParams::from_collective(self.omega, self.delta, self.gamma, self.delta_gamma)?)
    }
}
