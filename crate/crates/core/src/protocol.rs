//! Detection protocol: classical times, time normalization, the implicit
//! conditions fixing the initial position, the detector position and the
//! detection window, and the named scenario presets.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::observables::{DetectorConfig, Experiment, Side};
use crate::quadrature::{find_root, QuadratureSpec};
use crate::scattering::ScatteringModel;
use crate::state::{GaussianPacket, InitialState, SuperpositionState};
use crate::units::{HBAR, MASS};
use crate::{Error, Result};

/// Longest time searched for the switch-on instant.
pub const MAX_SEARCH_TIME: f64 = 1e6;

/// Coarse samples used to locate the switch-off instant.
const TF_SCAN_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolThresholds {
    /// Probability level, relative to the transmittance, that counts as
    /// negligible.
    pub epsilon: f64,
    /// Absolute tolerance for solved times and positions (a.u.).
    pub root_tol: f64,
}

impl Default for ProtocolThresholds {
    fn default() -> Self {
        ProtocolThresholds { epsilon: 1e-3, root_tol: 1e-3 }
    }
}

impl ProtocolThresholds {
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        let t = ProtocolThresholds { epsilon, ..Default::default() };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.root_tol > 0.0) {
            return Err(Error::Domain(format!("root tolerance must be positive, got {}", self.root_tol)));
        }
        Ok(())
    }
}

/// `t₀ = (X − x₀)m/p₀`.
pub fn classical_time(p0: f64, x0: f64, x: f64) -> f64 {
    (x - x0) * MASS / p0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeNormalization {
    /// `t / 2t₀`.
    FreeHalfWindow { t0: f64 },
    /// `(t − t_i) / (t_f − t_i)`.
    Window { t_i: f64, t_f: f64 },
}

impl TimeNormalization {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeNormalization::FreeHalfWindow { t0 } if !(t0 > 0.0) => {
                Err(Error::Domain(format!("classical time must be positive, got {t0}")))
            }
            TimeNormalization::Window { t_i, t_f } if !(t_f > t_i) => {
                Err(Error::Domain(format!("degenerate window [{t_i}, {t_f}]")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, t: f64) -> f64 {
        match *self {
            TimeNormalization::FreeHalfWindow { t0 } => t / (2.0 * t0),
            TimeNormalization::Window { t_i, t_f } => (t - t_i) / (t_f - t_i),
        }
    }
}

pub fn normalize_time(t: f64, mode: TimeNormalization) -> Result<f64> {
    mode.validate()?;
    Ok(mode.apply(t))
}

/// One time scan: an experiment, a detector position, a window and a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub experiment: Experiment,
    pub detector: f64,
    pub window: (f64, f64),
    pub grid: usize,
    pub normalization: TimeNormalization,
}

impl Scenario {
    pub fn new(
        id: impl Into<String>,
        experiment: Experiment,
        detector: f64,
        window: (f64, f64),
        grid: usize,
        normalization: TimeNormalization,
    ) -> Result<Self> {
        let (t_i, t_f) = window;
        if !(t_f > t_i) {
            return Err(Error::Domain(format!("window end {t_f} must exceed start {t_i}")));
        }
        if grid < 2 {
            return Err(Error::Domain(format!("a scan needs at least 2 samples, got {grid}")));
        }
        if matches!(experiment.model(), ScatteringModel::Free) && t_i != 0.0 {
            return Err(Error::Domain(format!("free scenarios start at t = 0, got {t_i}")));
        }
        DetectorConfig::new(detector, experiment.model())?;
        normalization.validate()?;
        Ok(Scenario { id: id.into(), experiment, detector, window, grid, normalization })
    }

    pub fn with_grid(mut self, grid: usize) -> Result<Self> {
        if grid < 2 {
            return Err(Error::Domain(format!("a scan needs at least 2 samples, got {grid}")));
        }
        self.grid = grid;
        Ok(self)
    }

    /// Uniform grid over the window, endpoints included.
    pub fn times(&self) -> Vec<f64> {
        let (a, b) = self.window;
        let n = self.grid - 1;
        (0..=n).map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 }).collect()
    }

    pub fn classical_time(&self) -> f64 {
        let state = self.experiment.state();
        classical_time(state.reference_momentum(), state.x0(), self.detector)
    }
}

/// Implicit initial position: the part of the initial packet already at
/// `x > 0` carries probability `ε𝖳`.
pub fn solve_x0(dp: f64, transmittance: f64, thresholds: &ProtocolThresholds) -> Result<f64> {
    thresholds.validate()?;
    if !(dp > 0.0) {
        return Err(Error::Domain(format!("momentum spread must be positive, got {dp}")));
    }
    let target = thresholds.epsilon * transmittance;
    let sigma = HBAR / (2.0 * dp);
    let residual = |x0: f64| Ok(0.5 * erfc(-x0 / (SQRT_2 * sigma)) - target);
    find_root(residual, -40.0 * sigma, 40.0 * sigma, thresholds.root_tol.min(1e-9 * sigma))
}

fn target(experiment: &Experiment, thresholds: &ProtocolThresholds) -> Result<f64> {
    thresholds.validate()?;
    let t = experiment.transmittance();
    if !(t > 0.0) {
        return Err(Error::Degenerate(format!("transmittance is {t:e}")));
    }
    Ok(thresholds.epsilon * t)
}

/// Switch-on instant: the transmitted probability still inside `x < d`
/// has dropped to `ε𝖳`.
pub fn solve_ti(experiment: &Experiment, thresholds: &ProtocolThresholds) -> Result<f64> {
    let level = target(experiment, thresholds)?;
    let edge = experiment.model().right_edge();
    let residual = |t: f64| Ok(experiment.position_tail_probability(edge, Side::Below, t)? - level);
    let state = experiment.state();
    let mut lo = 0.0;
    let mut hi = ((edge - state.x0()) * MASS / state.reference_momentum()).max(1.0);
    let mut f_hi = residual(hi)?;
    while f_hi > 0.0 {
        if hi >= MAX_SEARCH_TIME {
            return Err(Error::Bracketing { lo, hi, f_lo: f64::NAN, f_hi });
        }
        lo = hi;
        hi = (2.0 * hi).min(MAX_SEARCH_TIME);
        f_hi = residual(hi)?;
    }
    log::debug!("switch-on bracket [{lo}, {hi}]");
    find_root(residual, lo, hi, thresholds.root_tol)
}

/// Detector position: at `t_i` the probability already beyond `X` is `ε𝖳`.
pub fn solve_detector(experiment: &Experiment, t_i: f64, thresholds: &ProtocolThresholds) -> Result<f64> {
    let level = target(experiment, thresholds)?;
    let edge = experiment.model().right_edge();
    let state = experiment.state();
    let reach = 10.0 * (state.reference_momentum() + 4.0 * state.dp()) * t_i / MASS;
    let residual = |x: f64| Ok(experiment.position_tail_probability(x, Side::Above, t_i)? - level);
    find_root(residual, edge, edge + reach, thresholds.root_tol)
}

/// Switch-off instant: the last downward crossing of `⟨J⁺⟩` through its
/// value at `t_start`, after its global maximum, within `10·t₀`.
pub fn solve_tf(experiment: &Experiment, detector: f64, t_start: f64, thresholds: &ProtocolThresholds) -> Result<f64> {
    thresholds.validate()?;
    let state = experiment.state();
    let t0 = classical_time(state.reference_momentum(), state.x0(), detector);
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!("detector at {detector} is not ahead of the packet")));
    }
    let level = experiment.expectation_jplus(detector, t_start)?;
    let t_end = t_start + 10.0 * t0;
    let ts: Vec<f64> = (0..=TF_SCAN_POINTS)
        .map(|k| t_start + (t_end - t_start) * k as f64 / TF_SCAN_POINTS as f64)
        .collect();
    let values = ts
        .par_iter()
        .map(|&t| experiment.expectation_jplus(detector, t))
        .collect::<Result<Vec<f64>>>()?;
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (k, &v)| if v > values[best] { k } else { best });
    let crossing = (peak..TF_SCAN_POINTS)
        .rev()
        .find(|&k| values[k] >= level && values[k + 1] < level)
        .ok_or_else(|| Error::Numerical {
            context: format!("positive current never returns to {level:e} within 10·t₀ = {}", 10.0 * t0),
            achieved: values[TF_SCAN_POINTS],
            requested: level,
        })?;
    find_root(
        |t| Ok(experiment.expectation_jplus(detector, t)? - level),
        ts[crossing],
        ts[crossing + 1],
        thresholds.root_tol,
    )
}

/// Solved protocol parameters for one barrier width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolRow {
    pub width: f64,
    pub x0: f64,
    pub t_i: f64,
    pub t_f: f64,
    pub detector: f64,
    pub transmittance: f64,
    pub epsilon: f64,
}

/// Parameter values as printed in a published table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub width: f64,
    pub x0: f64,
    pub t_i: f64,
    pub t_f: f64,
    pub detector: f64,
}

const fn row(width: f64, x0: f64, t_i: f64, t_f: f64, detector: f64) -> PublishedRow {
    PublishedRow { width, x0, t_i, t_f, detector }
}

pub const TABLE1_ROWS: [PublishedRow; 4] = [
    row(2.0, -201.8, 785.0, 1550.0, 379.0),
    row(4.0, -228.0, 839.0, 1600.0, 382.0),
    row(8.0, -275.4, 933.0, 1700.0, 386.5),
    row(12.0, -316.6, 1014.0, 1800.0, 391.0),
];

pub const TABLE2_ROWS: [PublishedRow; 4] = [
    row(2.0, -20.15, 145.7, 530.0, 112.9),
    row(4.0, -22.48, 137.0, 470.0, 108.5),
    row(8.0, -25.84, 141.1, 390.0, 117.3),
    row(10.0, -28.30, 254.0, 573.0, 229.4),
];

/// A family of barrier experiments differing only in the barrier width.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub id: String,
    pub p0: f64,
    pub dp: f64,
    pub p_barrier: f64,
    pub published: Vec<PublishedRow>,
}

impl TableSpec {
    pub fn widths(&self) -> Vec<f64> {
        self.published.iter().map(|r| r.width).collect()
    }

    pub fn solve_row(&self, width: f64, thresholds: &ProtocolThresholds, quad: &QuadratureSpec) -> Result<ProtocolRow> {
        let model = ScatteringModel::barrier(width, self.p_barrier)?;
        let packet = GaussianPacket::new(self.p0, self.dp, 0.0)?;
        let transmittance = model.transmittance(&packet.into(), quad)?;
        let x0 = solve_x0(self.dp, transmittance, thresholds)?;
        let experiment = Experiment::new(packet.with_x0(x0).into(), model, *quad)?;
        let t_i = solve_ti(&experiment, thresholds)?;
        let detector = solve_detector(&experiment, t_i, thresholds)?;
        let t_f = solve_tf(&experiment, detector, t_i, thresholds)?;
        log::info!("{} d = {width}: x0 = {x0:.4}, t_i = {t_i:.3}, X = {detector:.3}, t_f = {t_f:.3}", self.id);
        Ok(ProtocolRow { width, x0, t_i, t_f, detector, transmittance, epsilon: thresholds.epsilon })
    }

    /// Rows are independent and solved concurrently; failures stay per row.
    pub fn solve(&self, thresholds: &ProtocolThresholds, quad: &QuadratureSpec) -> Vec<Result<ProtocolRow>> {
        self.widths().par_iter().map(|&w| self.solve_row(w, thresholds, quad)).collect()
    }

    /// Scan of the experiment described by one published row.
    pub fn published_scenario(&self, row: &PublishedRow, grid: usize, quad: &QuadratureSpec) -> Result<Scenario> {
        let model = ScatteringModel::barrier(row.width, self.p_barrier)?;
        let packet = GaussianPacket::new(self.p0, self.dp, row.x0)?;
        let experiment = Experiment::new(packet.into(), model, *quad)?;
        Scenario::new(
            format!("{}-d{}", self.id, row.width),
            experiment,
            row.detector,
            (row.t_i, row.t_f),
            grid,
            TimeNormalization::Window { t_i: row.t_i, t_f: row.t_f },
        )
    }
}

pub fn table1() -> TableSpec {
    TableSpec { id: "table1".into(), p0: 0.5, dp: 0.01, p_barrier: 0.8, published: TABLE1_ROWS.to_vec() }
}

pub fn table2() -> TableSpec {
    TableSpec { id: "table2".into(), p0: 0.5, dp: 0.1, p_barrier: 0.8, published: TABLE2_ROWS.to_vec() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetId {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Table1,
    Table2,
}

impl PresetId {
    pub const ALL: [PresetId; 10] = [
        PresetId::Fig1a,
        PresetId::Fig1b,
        PresetId::Fig2,
        PresetId::Fig3,
        PresetId::Fig4,
        PresetId::Fig5,
        PresetId::Fig6,
        PresetId::Fig7,
        PresetId::Table1,
        PresetId::Table2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::Fig1a => "fig1a",
            PresetId::Fig1b => "fig1b",
            PresetId::Fig2 => "fig2",
            PresetId::Fig3 => "fig3",
            PresetId::Fig4 => "fig4",
            PresetId::Fig5 => "fig5",
            PresetId::Fig6 => "fig6",
            PresetId::Fig7 => "fig7",
            PresetId::Table1 => "table1",
            PresetId::Table2 => "table2",
        }
    }
}

impl std::fmt::Display for PresetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Scans(Vec<Scenario>),
    Table(TableSpec),
}

pub const DEFAULT_GRID: usize = 1024;

/// Fig. 1 grids have an odd count so that `t_n = ½` is a node.
const FIG1_GRID: usize = 513;

fn gaussian_halfwindow(dp: f64, quad: &QuadratureSpec) -> Result<Scenario> {
    let p0 = 0.5;
    let detector = 3.0 * HBAR / (2.0 * dp);
    let t0 = classical_time(p0, 0.0, detector);
    let experiment = Experiment::new(GaussianPacket::new(p0, dp, 0.0)?.into(), ScatteringModel::Free, *quad)?;
    Scenario::new(
        format!("fig1-dp{dp:e}"),
        experiment,
        detector,
        (0.0, 2.0 * t0),
        FIG1_GRID,
        TimeNormalization::FreeHalfWindow { t0 },
    )
}

fn free_superposition(
    id: &str,
    beta: f64,
    p1: f64,
    p2: f64,
    dp: f64,
    quad: &QuadratureSpec,
    thresholds: &ProtocolThresholds,
) -> Result<Scenario> {
    let state = InitialState::from(SuperpositionState::new(beta, p1, p2, dp, 0.0)?);
    let detector = 3.0 * HBAR / (2.0 * dp);
    let experiment = Experiment::new(state, ScatteringModel::Free, *quad)?;
    let t_f = solve_tf(&experiment, detector, 0.0, thresholds)?;
    Scenario::new(id, experiment, detector, (0.0, t_f), DEFAULT_GRID, TimeNormalization::Window { t_i: 0.0, t_f })
}

pub fn preset(id: PresetId, quad: &QuadratureSpec, thresholds: &ProtocolThresholds) -> Result<Preset> {
    let published = |spec: TableSpec, rows: &[PublishedRow]| -> Result<Preset> {
        rows.iter()
            .map(|r| spec.published_scenario(r, DEFAULT_GRID, quad))
            .collect::<Result<Vec<_>>>()
            .map(Preset::Scans)
    };
    match id {
        PresetId::Fig1a => [1e-4, 1e-3, 1e-2]
            .iter()
            .map(|&dp| gaussian_halfwindow(dp, quad))
            .collect::<Result<Vec<_>>>()
            .map(Preset::Scans),
        PresetId::Fig1b => Ok(Preset::Scans(vec![gaussian_halfwindow(1e-2, quad)?])),
        PresetId::Fig2 => Ok(Preset::Scans(vec![free_superposition("fig2", 2.0, 0.4, 0.5, 0.01, quad, thresholds)?])),
        PresetId::Fig3 => Ok(Preset::Scans(vec![free_superposition("fig3", 2.0, 0.2, 0.5, 0.01, quad, thresholds)?])),
        PresetId::Fig4 => {
            Ok(Preset::Scans(vec![free_superposition("fig4", 100.0, 4e-3, 1.0, 5e-4, quad, thresholds)?]))
        }
        PresetId::Fig5 => published(table1(), &TABLE1_ROWS),
        PresetId::Fig6 => published(table2(), &TABLE2_ROWS[..3]),
        PresetId::Fig7 => published(table2(), &TABLE2_ROWS[3..]),
        PresetId::Table1 => Ok(Preset::Table(table1())),
        PresetId::Table2 => Ok(Preset::Table(table2())),
    }
}

/// Looks a preset up by name.
pub fn preset_by_name(name: &str, quad: &QuadratureSpec, thresholds: &ProtocolThresholds) -> Result<Preset> {
    preset(name.parse()?, quad, thresholds)
}
