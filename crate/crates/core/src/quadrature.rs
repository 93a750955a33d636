//! Composite Gauss–Legendre integration sized to the oscillation rate of the
//! integrand, and a deterministic bisection root finder.
//!
//! Every momentum integral in this crate has the form
//! `∫ g(p) e^{iS(p)} dp` with a Gaussian-weighted `g` and a phase whose local
//! rate is `|X − p t/m|/ħ`. Panels are chosen uniformly per support interval
//! so that the fastest local wavelength gets at least
//! [`QuadratureSpec::nodes_per_wavelength`] nodes; the panel count is then
//! doubled until two successive levels agree.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

/// Nodes per Gauss–Legendre panel.
pub const GL_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Half-width of each support interval in units of its width.
    pub n_sigma: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub nodes_per_wavelength: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_sigma: 12.0,
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_panels: 1 << 16,
            nodes_per_wavelength: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_sigma >= 6.0) {
            return Err(Error::Domain(format!("n_sigma must be >= 6, got {}", self.n_sigma)));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if !(self.nodes_per_wavelength >= 4.0) {
            return Err(Error::Domain(format!(
                "nodes_per_wavelength must be >= 4, got {}",
                self.nodes_per_wavelength
            )));
        }
        if self.max_panels == 0 {
            return Err(Error::Domain("max_panels must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..self }
    }
}

/// A Gaussian-like bump in momentum space: `center ± n_sigma·width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub center: f64,
    pub width: f64,
}

impl Support {
    pub fn new(center: f64, width: f64) -> Self {
        Support { center, width }
    }
}

/// Converged integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<Q> {
    pub value: Q,
    pub error: f64,
    pub panels: usize,
}

/// Values that can be accumulated by the quadrature rules: reals, complex
/// numbers, and fixed-size vectors of complex numbers (several weights
/// integrated against one set of nodes).
pub trait Quantity: Copy {
    fn zero() -> Self;
    fn add_scaled(&mut self, other: &Self, w: f64);
    /// Largest componentwise modulus.
    fn magnitude(&self) -> f64;
    /// Largest componentwise distance to `other`.
    fn distance(&self, other: &Self) -> f64;
    /// Whether every component of `self` is within tolerance of `other`,
    /// where `floor` bounds rounding noise.
    fn agrees(&self, other: &Self, rel: f64, abs: f64, floor: f64) -> bool;
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn agrees(&self, other: &Self, rel: f64, abs: f64, floor: f64) -> bool {
        self.distance(other) <= (rel * other.abs()).max(abs).max(floor)
    }
}

impl Quantity for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn agrees(&self, other: &Self, rel: f64, abs: f64, floor: f64) -> bool {
        self.distance(other) <= (rel * other.norm()).max(abs).max(floor)
    }
}

impl<const N: usize> Quantity for [Complex64; N] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); N]
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b * w;
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
    fn agrees(&self, other: &Self, rel: f64, abs: f64, floor: f64) -> bool {
        self.iter()
            .zip(other)
            .all(|(a, b)| (a - b).norm() <= (rel * b.norm()).max(abs).max(floor))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Nodes and weights of the composite rule with `panels` equal panels.
pub fn composite_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gl_rule();
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * GL_ORDER);
    let mut weights = Vec::with_capacity(panels * GL_ORDER);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(ws) {
            nodes.push(mid + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Composite sum plus `Σ|w f|`, which bounds rounding in the sum.
fn composite<Q: Quantity, F: Fn(f64) -> Q>(f: &F, a: f64, b: f64, panels: usize) -> (Q, f64) {
    let (xs, ws) = gl_rule();
    let h = (b - a) / panels as f64;
    let mut total = Q::zero();
    let mut mass = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(ws) {
            let v = f(mid + 0.5 * h * x);
            let wk = 0.5 * h * w;
            total.add_scaled(&v, wk);
            mass += wk * v.magnitude();
        }
    }
    (total, mass)
}

fn rounding_floor(mass: f64) -> f64 {
    64.0 * f64::EPSILON * mass
}

/// Integrates `f` over `[a, b]`, starting from `initial_panels` and doubling
/// until two levels agree.
pub fn integrate_interval<Q: Quantity, F: Fn(f64) -> Q>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    spec: &QuadratureSpec,
) -> Result<Integral<Q>> {
    integrate_intervals(&f, &[(a, b, initial_panels.max(1))], spec, "interval quadrature")
}

fn integrate_intervals<Q: Quantity, F: Fn(f64) -> Q>(
    f: &F,
    intervals: &[(f64, f64, usize)],
    spec: &QuadratureSpec,
    context: &str,
) -> Result<Integral<Q>> {
    let level = |scale: usize| {
        let mut total = Q::zero();
        let mut mass = 0.0;
        for &(a, b, n) in intervals {
            if b > a {
                let (v, m) = composite(f, a, b, n * scale);
                total.add_scaled(&v, 1.0);
                mass += m;
            }
        }
        (total, mass)
    };
    let base: usize = intervals.iter().map(|iv| iv.2).sum();
    let mut scale = 1;
    let (mut coarse, _) = level(scale);
    loop {
        if 2 * scale * base > spec.max_panels {
            let (fine, _) = level(scale);
            return Err(Error::Numerical {
                context: context.to_string(),
                achieved: fine.distance(&coarse),
                requested: (spec.rel_tol * fine.magnitude()).max(spec.abs_tol),
            });
        }
        scale *= 2;
        let (fine, mass) = level(scale);
        let floor = rounding_floor(mass);
        if coarse.agrees(&fine, spec.rel_tol, spec.abs_tol, floor) {
            return Ok(Integral {
                value: fine,
                error: fine.distance(&coarse).max(floor),
                panels: scale * base,
            });
        }
        coarse = fine;
    }
}

/// Union of `[max(0, c − n_sigma·w), c + n_sigma·w]` over the supports,
/// merged where they overlap.
pub fn support_intervals(supports: &[Support], n_sigma: f64) -> Vec<(f64, f64, f64)> {
    let mut ivs: Vec<(f64, f64, f64)> = supports
        .iter()
        .map(|s| {
            (
                (s.center - n_sigma * s.width).max(0.0),
                s.center + n_sigma * s.width,
                s.width,
            )
        })
        .filter(|iv| iv.1 > iv.0)
        .collect();
    ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => {
                last.1 = last.1.max(iv.1);
                last.2 = last.2.min(iv.2);
            }
            _ => merged.push(iv),
        }
    }
    merged
}

/// Initial panel count for `[a, b]`: at least one panel per two widths, and
/// enough panels that the fastest sampled phase rate gets
/// `nodes_per_wavelength` nodes per wavelength.
pub fn initial_panels<R: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    width: f64,
    phase_rate: &R,
    spec: &QuadratureSpec,
) -> usize {
    const PROBES: usize = 16;
    let rate = (0..=PROBES)
        .map(|k| phase_rate(a + (b - a) * k as f64 / PROBES as f64).abs())
        .fold(0.0, f64::max);
    let wavelengths = (b - a) * rate / (2.0 * PI);
    let osc = (wavelengths * spec.nodes_per_wavelength / GL_ORDER as f64).ceil();
    let shape = ((b - a) / (2.0 * width)).ceil();
    (osc.max(shape).max(1.0)) as usize
}

/// Integrates a momentum-space integrand over the union of its supports.
///
/// `phase_rate(p)` is the local rate of the integrand's phase, typically
/// `|X − p t/m|/ħ`; it sets the panel density.
pub fn integrate_momentum<Q, F, R>(
    integrand: F,
    supports: &[Support],
    phase_rate: R,
    spec: &QuadratureSpec,
) -> Result<Integral<Q>>
where
    Q: Quantity,
    F: Fn(f64) -> Q,
    R: Fn(f64) -> f64,
{
    if supports.is_empty() {
        return Err(Error::Domain("momentum integral needs at least one support".into()));
    }
    if let Some(s) = supports.iter().find(|s| !(s.width > 0.0)) {
        return Err(Error::Domain(format!("support width must be positive, got {}", s.width)));
    }
    let intervals: Vec<(f64, f64, usize)> = support_intervals(supports, spec.n_sigma)
        .into_iter()
        .map(|(a, b, w)| (a, b, initial_panels(a, b, w, &phase_rate, spec)))
        .collect();
    integrate_intervals(&integrand, &intervals, spec, "momentum quadrature")
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// `f` may fail (it is usually itself a quadrature); failures propagate.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
