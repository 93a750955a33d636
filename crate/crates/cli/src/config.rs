//! Run configuration: command-line flags merged over an optional TOML file
//! merged over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use arrival_core::observables::Experiment;
use arrival_core::protocol::{ProtocolThresholds, Scenario, TimeNormalization};
use arrival_core::{GaussianPacket, InitialState, QuadratureSpec, ScatteringModel, SuperpositionState};
use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::ConfigError;

pub const DEFAULT_GRID: usize = 1024;
pub const MIN_GRID: usize = 16;
pub const DEFAULT_DIGITS: usize = 12;
pub const DEFAULT_BARRIER_MOMENTUM: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Scan one scenario and write its time series.
    Run,
    /// Solve the protocol parameters of a table preset.
    Table,
    /// Scan every member of a multi-scenario preset.
    Sweep,
    /// Run the internal oracle checks.
    Validate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "arrival-lab", version, about = "Probability current versus positive-definite arrival distributions")]
pub struct Cli {
    pub command: Option<CommandKind>,
    /// Preset id (fig1a … fig7, table1, table2) or `inline`.
    #[arg(long, visible_alias = "id")]
    pub scenario: Option<String>,
    /// Number of time samples.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output file (run, table) or directory (sweep); stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Negligible-probability level relative to the transmittance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Relative tolerance of the momentum quadrature.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Significant digits in CSV output.
    #[arg(long)]
    pub digits: Option<usize>,
    /// TOML file with the same keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Keys accepted in a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<CommandKind>,
    pub scenario: Option<String>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub quad_tol: Option<f64>,
    pub n_sigma: Option<f64>,
    pub digits: Option<usize>,
    // inline scenario
    pub p0: Option<f64>,
    pub dp: Option<f64>,
    pub x0: Option<f64>,
    pub beta: Option<f64>,
    pub p1: Option<f64>,
    pub barrier_width: Option<f64>,
    pub barrier_momentum: Option<f64>,
    pub detector: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    fn has_inline_keys(&self) -> bool {
        self.p0.is_some() || self.dp.is_some() || self.detector.is_some() || self.t_end.is_some()
    }
}

/// Parameters of a scenario given directly rather than by preset.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineScenario {
    pub p0: f64,
    pub dp: f64,
    pub x0: f64,
    /// `(β, p₁)`; `p0` then plays the role of `p₂`.
    pub superposition: Option<(f64, f64)>,
    /// `(d, p_B)`.
    pub barrier: Option<(f64, f64)>,
    pub detector: f64,
    pub window: (f64, f64),
}

impl InlineScenario {
    fn from_file(file: &FileConfig) -> Result<Self, ConfigError> {
        let need = |v: Option<f64>, key: &'static str| v.ok_or(ConfigError::MissingKey(key));
        let superposition = match (file.beta, file.p1) {
            (Some(b), Some(p1)) => Some((b, p1)),
            (None, None) => None,
            _ => return Err(ConfigError::Invalid { key: "beta", message: "beta and p1 must be given together".into() }),
        };
        let barrier = file
            .barrier_width
            .map(|d| (d, file.barrier_momentum.unwrap_or(DEFAULT_BARRIER_MOMENTUM)));
        Ok(InlineScenario {
            p0: need(file.p0, "p0")?,
            dp: need(file.dp, "dp")?,
            x0: file.x0.unwrap_or(0.0),
            superposition,
            barrier,
            detector: need(file.detector, "detector")?,
            window: (file.t_start.unwrap_or(0.0), need(file.t_end, "t_end")?),
        })
    }

    pub fn build(&self, grid: usize, quad: &QuadratureSpec) -> arrival_core::Result<Scenario> {
        let state: InitialState = match self.superposition {
            Some((beta, p1)) => SuperpositionState::new(beta, p1, self.p0, self.dp, self.x0)?.into(),
            None => GaussianPacket::new(self.p0, self.dp, self.x0)?.into(),
        };
        let model = match self.barrier {
            Some((d, pb)) => ScatteringModel::barrier(d, pb)?,
            None => ScatteringModel::Free,
        };
        let experiment = Experiment::new(state, model, *quad)?;
        let (t_i, t_f) = self.window;
        Scenario::new("inline", experiment, self.detector, self.window, grid, TimeNormalization::Window { t_i, t_f })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Preset(String),
    Inline(InlineScenario),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub scenario: Option<ScenarioSource>,
    /// Explicit sample count; presets fall back to their own default.
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub quad: QuadratureSpec,
    pub thresholds: ProtocolThresholds,
    pub digits: usize,
}

impl RunConfig {
    /// Merges flags over the file (if any) over defaults.
    pub fn resolve(cli: &Cli, file: Option<&FileConfig>) -> Result<Self, ConfigError> {
        let empty = FileConfig::default();
        let file = file.unwrap_or(&empty);
        let command = cli.command.or(file.command).ok_or(ConfigError::MissingKey("command"))?;

        let scenario = match cli.scenario.clone().or_else(|| file.scenario.clone()) {
            Some(s) if s == "inline" => Some(ScenarioSource::Inline(InlineScenario::from_file(file)?)),
            Some(s) => Some(ScenarioSource::Preset(s)),
            None if file.has_inline_keys() => Some(ScenarioSource::Inline(InlineScenario::from_file(file)?)),
            None => None,
        };
        if scenario.is_none() && command != CommandKind::Validate {
            return Err(ConfigError::MissingKey("scenario"));
        }

        let grid = cli.grid.or(file.grid);
        if let Some(g) = grid {
            if g < MIN_GRID {
                return Err(ConfigError::Invalid { key: "grid", message: format!("must be at least {MIN_GRID}, got {g}") });
            }
        }

        let mut quad = QuadratureSpec::default();
        if let Some(tol) = cli.quad_tol.or(file.quad_tol) {
            quad = quad.with_rel_tol(tol);
        }
        if let Some(n) = file.n_sigma {
            quad.n_sigma = n;
        }
        quad.validate().map_err(|e| ConfigError::Invalid { key: "quad_tol", message: e.to_string() })?;

        let mut thresholds = ProtocolThresholds::default();
        if let Some(eps) = cli.epsilon.or(file.epsilon) {
            thresholds.epsilon = eps;
        }
        thresholds.validate().map_err(|e| ConfigError::Invalid { key: "epsilon", message: e.to_string() })?;

        let digits = cli.digits.or(file.digits).unwrap_or(DEFAULT_DIGITS);
        if !(1..=17).contains(&digits) {
            return Err(ConfigError::Invalid { key: "digits", message: format!("must lie in 1..=17, got {digits}") });
        }

        Ok(RunConfig {
            command,
            scenario,
            grid,
            out: cli.out.clone().or_else(|| file.out.clone()),
            quad,
            thresholds,
            digits,
        })
    }

    /// Parses flags (including the program name) and the file they point to.
    pub fn from_args<I, T>(args: I) -> Result<(Self, Cli), ConfigError>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        let file = cli.config.as_deref().map(FileConfig::load).transpose()?;
        Ok((Self::resolve(&cli, file.as_ref())?, cli))
    }
}
