use std::fs;
use std::path::Path;

use arrival_core::comparison::{scan, TimeSeries};
use arrival_core::protocol::{preset_by_name, Preset, Scenario};

use crate::config::{CommandKind, RunConfig, ScenarioSource, DEFAULT_GRID};
use crate::output::{table_csv, timeseries_csv, write_document};
use crate::validate::run_checks;
use crate::{CliError, ConfigError};

/// Successful runs either produced everything or left poisoned entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    Partial,
}

fn scenarios(cfg: &RunConfig) -> Result<Vec<Scenario>, CliError> {
    let source = cfg.scenario.as_ref().ok_or(ConfigError::MissingKey("scenario"))?;
    let list = match source {
        ScenarioSource::Inline(s) => vec![s.build(cfg.grid.unwrap_or(DEFAULT_GRID), &cfg.quad)?],
        ScenarioSource::Preset(name) => match preset_by_name(name, &cfg.quad, &cfg.thresholds)? {
            Preset::Scans(list) => list,
            Preset::Table(_) => {
                return Err(ConfigError::Invalid { key: "scenario", message: format!("{name} is a table; use the table command") }.into())
            }
        },
    };
    match cfg.grid {
        Some(g) => Ok(list.into_iter().map(|s| s.with_grid(g)).collect::<Result<_, _>>()?),
        None => Ok(list),
    }
}

fn scan_logged(s: &Scenario) -> (TimeSeries, Outcome) {
    log::info!("scanning {} over [{}, {}] with {} samples", s.id, s.window.0, s.window.1, s.grid);
    let series = scan(s);
    let outcome = if series.failures() > 0 {
        log::warn!("{}: {} of {} samples failed", s.id, series.failures(), series.points.len());
        Outcome::Partial
    } else {
        Outcome::Complete
    };
    (series, outcome)
}

fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let list = scenarios(cfg)?;
    let [s] = list.as_slice() else {
        return Err(ConfigError::Invalid {
            key: "scenario",
            message: format!("preset has {} scenarios; use the sweep command", list.len()),
        }
        .into());
    };
    let (series, outcome) = scan_logged(s);
    write_document(cfg.out.as_deref(), &timeseries_csv(&series, cfg.digits))?;
    Ok(outcome)
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = cfg.out.as_deref().ok_or(ConfigError::MissingKey("out"))?;
    fs::create_dir_all(dir).map_err(|source| ConfigError::Io { path: dir.to_path_buf(), source })?;
    let mut outcome = Outcome::Complete;
    for s in scenarios(cfg)? {
        let (series, o) = scan_logged(&s);
        if o == Outcome::Partial {
            outcome = Outcome::Partial;
        }
        let path = dir.join(format!("{}.csv", s.id));
        write_document(Some(&path), &timeseries_csv(&series, cfg.digits))?;
    }
    Ok(outcome)
}

fn table(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Some(ScenarioSource::Preset(name)) = &cfg.scenario else {
        return Err(ConfigError::Invalid { key: "scenario", message: "the table command needs a table preset".into() }.into());
    };
    let Preset::Table(spec) = preset_by_name(name, &cfg.quad, &cfg.thresholds)? else {
        return Err(ConfigError::Invalid { key: "scenario", message: format!("{name} is not a table preset") }.into());
    };
    let rows = spec.solve(&cfg.thresholds, &cfg.quad);
    let mut outcome = Outcome::Complete;
    for (w, r) in spec.widths().iter().zip(&rows) {
        if let Err(e) = r {
            log::warn!("{name} d = {w}: {e}");
            outcome = Outcome::Partial;
        }
    }
    write_document(cfg.out.as_deref(), &table_csv(&spec.widths(), &rows, cfg.thresholds.epsilon, cfg.digits))?;
    Ok(outcome)
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let checks = run_checks(&cfg.quad);
    let mut report = String::new();
    for c in &checks {
        report.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    report.push_str(&format!("validate: {} passed, {failed} failed\n", checks.len() - failed));
    write_document(cfg.out.as_deref().map(Path::new), &report)?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(Outcome::Complete)
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        CommandKind::Run => run(cfg),
        CommandKind::Sweep => sweep(cfg),
        CommandKind::Table => table(cfg),
        CommandKind::Validate => validate(cfg),
    }
}
