//! Relative difference `Δ = 1 − ⟨J⟩/⟨J⁺⟩`, its modulus variant, time
//! scans and the features read off them.

use rayon::prelude::*;

use crate::observables::CurrentSample;
use crate::protocol::{Scenario, TimeNormalization};
use crate::quadrature::find_root;
use crate::Result;

/// Below this `⟨J⁺⟩` (a.u.) the relative difference is left undefined.
pub const J_PLUS_FLOOR: f64 = 1e-30;

/// `(Δ, Δ_abs)`, or `None` when `⟨J⁺⟩` is too small to divide by.
///
/// `Δ_abs` is formed as `2 − Δ` for negative currents, which makes the
/// relation between the two hold exactly in floating point.
pub fn relative_difference(j: f64, j_plus: f64) -> Option<(f64, f64)> {
    if !(j_plus > J_PLUS_FLOOR) || !j.is_finite() {
        return None;
    }
    let delta = 1.0 - j / j_plus;
    let delta_abs = if j < 0.0 { 2.0 - delta } else { delta };
    Some((delta, delta_abs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSample {
    pub t: f64,
    pub delta: f64,
    pub delta_abs: f64,
    pub j_negative: bool,
}

impl DeltaSample {
    pub fn from_current(s: &CurrentSample) -> Option<Self> {
        relative_difference(s.j, s.j_plus).map(|(delta, delta_abs)| DeltaSample {
            t: s.t,
            delta,
            delta_abs,
            j_negative: s.j < 0.0,
        })
    }
}

/// One scan point. `current` is `None` when the quadrature failed at this
/// time; `delta` is additionally `None` when `⟨J⁺⟩` fell below the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub t_n: f64,
    pub current: Option<CurrentSample>,
    pub delta: Option<DeltaSample>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub scenario: Scenario,
    pub points: Vec<SeriesPoint>,
}

impl TimeSeries {
    pub fn normalization(&self) -> TimeNormalization {
        self.scenario.normalization
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.current.is_none()).count()
    }

    pub fn deltas(&self) -> impl Iterator<Item = &DeltaSample> {
        self.points.iter().filter_map(|p| p.delta.as_ref())
    }
}

fn evaluate(scenario: &Scenario, t: f64) -> SeriesPoint {
    let t_n = scenario.normalization.apply(t);
    match scenario.experiment.sample(scenario.detector, t) {
        Ok(current) => SeriesPoint { t, t_n, delta: DeltaSample::from_current(&current), current: Some(current), failure: None },
        Err(e) => {
            log::warn!("{}: sample at t = {t} failed: {e}", scenario.id);
            SeriesPoint { t, t_n, current: None, delta: None, failure: Some(e.to_string()) }
        }
    }
}

/// Scan over the scenario's own grid.
pub fn scan(scenario: &Scenario) -> TimeSeries {
    scan_times(scenario, &scenario.times())
}

/// Scan over explicit times, evaluated concurrently; output order follows
/// the input order.
pub fn scan_times(scenario: &Scenario, times: &[f64]) -> TimeSeries {
    let points = times.par_iter().map(|&t| evaluate(scenario, t)).collect();
    TimeSeries { scenario: scenario.clone(), points }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureReport {
    /// Times where `Δ` changes sign.
    pub zero_crossings: Vec<f64>,
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
    /// Maximal intervals with `⟨J⟩ < 0`.
    pub negativity_intervals: Vec<(f64, f64)>,
}

impl FeatureReport {
    pub fn global_maximum(&self) -> Option<Extremum> {
        self.maxima.iter().copied().fold(None, |best, e| match best {
            Some(b) if b.value >= e.value => Some(b),
            _ => Some(e),
        })
    }

    pub fn global_minimum(&self) -> Option<Extremum> {
        self.minima.iter().copied().fold(None, |best, e| match best {
            Some(b) if b.value <= e.value => Some(b),
            _ => Some(e),
        })
    }
}

/// Vertex of the parabola through three equally spaced samples.
fn parabolic_vertex(t: [f64; 3], y: [f64; 3]) -> Extremum {
    let h = t[1] - t[0];
    let denom = y[0] - 2.0 * y[1] + y[2];
    if denom == 0.0 {
        return Extremum { t: t[1], value: y[1] };
    }
    let shift = (0.5 * (y[0] - y[2]) / denom).clamp(-1.0, 1.0);
    Extremum { t: t[1] + shift * h, value: y[1] - 0.25 * (y[0] - y[2]) * shift }
}

/// Zero crossings are refined by bisection on freshly evaluated `Δ`
/// (falling back to linear interpolation if that fails); extrema by a
/// parabola through three samples; negativity intervals by bisection on `⟨J⟩`.
pub fn extract_features(series: &TimeSeries) -> FeatureReport {
    let scenario = &series.scenario;
    let tol = series
        .points
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(f64::INFINITY, f64::min)
        * 1e-6;
    let delta_at = |t: f64| -> Result<f64> {
        let s = scenario.experiment.sample(scenario.detector, t)?;
        Ok(relative_difference(s.j, s.j_plus).map_or(f64::NAN, |d| d.0))
    };
    let j_at = |t: f64| -> Result<f64> { scenario.experiment.expectation_j(scenario.detector, t) };

    let mut report = FeatureReport::default();
    let defined: Vec<&DeltaSample> = series.deltas().collect();

    for w in defined.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.delta == 0.0 {
            report.zero_crossings.push(a.t);
        } else if a.delta * b.delta < 0.0 {
            let t = find_root(delta_at, a.t, b.t, tol)
                .unwrap_or_else(|_| a.t + (b.t - a.t) * a.delta / (a.delta - b.delta));
            report.zero_crossings.push(t);
        }
    }

    for w in defined.windows(3) {
        let t = [w[0].t, w[1].t, w[2].t];
        let y = [w[0].delta, w[1].delta, w[2].delta];
        let even = ((t[2] - t[1]) - (t[1] - t[0])).abs() <= 1e-9 * (t[2] - t[0]);
        let vertex = |t: [f64; 3], y: [f64; 3]| {
            if even {
                parabolic_vertex(t, y)
            } else {
                Extremum { t: t[1], value: y[1] }
            }
        };
        if y[1] > y[0] && y[1] >= y[2] {
            report.maxima.push(vertex(t, y));
        } else if y[1] < y[0] && y[1] <= y[2] {
            report.minima.push(vertex(t, y));
        }
    }

    let evaluated: Vec<&CurrentSample> = series.points.iter().filter_map(|p| p.current.as_ref()).collect();
    let edge = |lo: &CurrentSample, hi: &CurrentSample| {
        find_root(j_at, lo.t, hi.t, tol).unwrap_or_else(|_| lo.t + (hi.t - lo.t) * lo.j / (lo.j - hi.j))
    };
    let mut start: Option<f64> = None;
    for (k, s) in evaluated.iter().enumerate() {
        match (s.j < 0.0, start) {
            (true, None) => start = Some(if k == 0 { s.t } else { edge(evaluated[k - 1], s) }),
            (false, Some(a)) => {
                report.negativity_intervals.push((a, edge(evaluated[k - 1], s)));
                start = None;
            }
            _ => {}
        }
    }
    if let (Some(a), Some(last)) = (start, evaluated.last()) {
        report.negativity_intervals.push((a, last.t));
    }
    report
}
