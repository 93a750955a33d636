//! Expectation values of the current `Ĵ(X)` and of its positive-definite
//! counterpart `Ĵ⁺(X)` in the freely evolving transmitted state, the
//! arrival distribution, and position-space densities of that state.
//!
//! All of them are built from the functional
//!
//! ```text
//! I[f](X, t) = ∫₀^∞ dp T(p) f(p) ⟨p|ψ_in⟩ e^{−i p² t / 2mħ} e^{i p X / ħ}
//! ```
//!
//! with `⟨J⟩ = Re(I*[p] I[1]) / (m h)` and `⟨J⁺⟩ = |I[√p]|² / (m h)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::quadrature::{
    composite_rule, initial_panels, integrate_momentum, support_intervals, QuadratureSpec,
};
use crate::scattering::ScatteringModel;
use crate::state::InitialState;
use crate::units::{H, HBAR, MASS};
use crate::{Error, Result};

/// One evaluation of both currents at `(X, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSample {
    pub t: f64,
    pub j: f64,
    pub j_plus: f64,
    /// `j_plus / 𝖳`.
    pub p_x: f64,
}

/// The momentum weights entering the currents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    Momentum,
    SqrtMomentum,
}

impl Weight {
    pub fn eval(self, p: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Momentum => p,
            Weight::SqrtMomentum => p.sqrt(),
        }
    }
}

/// `I[1]`, `I[p]` and `I[√p]` at one `(X, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    pub one: Complex64,
    pub momentum: Complex64,
    pub sqrt_momentum: Complex64,
}

impl Functionals {
    pub fn current(&self) -> f64 {
        (self.momentum.conj() * self.one).re / (MASS * H)
    }

    pub fn positive_current(&self) -> f64 {
        self.sqrt_momentum.norm_sqr() / (MASS * H)
    }
}

/// Detector position; behind a barrier it must lie past the right edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    x: f64,
}

impl DetectorConfig {
    pub fn new(x: f64, model: &ScatteringModel) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("detector position must be finite, got {x}")));
        }
        if let ScatteringModel::RectangularBarrier(_) = model {
            if !(x > model.right_edge()) {
                return Err(Error::Domain(format!(
                    "detector at {x} must lie behind the barrier edge {}",
                    model.right_edge()
                )));
            }
        }
        Ok(DetectorConfig { x })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// A state, a scattering model and the quadrature settings used to
/// evaluate observables on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    state: InitialState,
    model: ScatteringModel,
    quad: QuadratureSpec,
    transmittance: f64,
}

impl Experiment {
    pub fn new(state: InitialState, model: ScatteringModel, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        let transmittance = model.transmittance(&state, &quad)?;
        Ok(Experiment { state, model, quad, transmittance })
    }

    pub fn state(&self) -> &InitialState {
        &self.state
    }

    pub fn model(&self) -> &ScatteringModel {
        &self.model
    }

    pub fn quad(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// `T(p)⟨p|ψ_in⟩` (zero for `p ≤ 0`).
    fn transmitted_amplitude(&self, p: f64) -> Complex64 {
        if p > 0.0 {
            self.model.transmission_unchecked(p) * self.state.amplitude(p)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn phase_rate(&self, x: f64, t: f64) -> impl Fn(f64) -> f64 {
        let offset = x - self.state.x0();
        let edge = self.model.right_edge();
        move |p| ((offset - p * t / MASS).abs() + edge) / HBAR
    }

    fn free_phase(p: f64, x: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, (p * x - p * p * t / (2.0 * MASS)) / HBAR)
    }

    /// `I[f](X, t)` for an arbitrary real weight.
    pub fn functional<W: Fn(f64) -> f64>(&self, weight: W, x: f64, t: f64) -> Result<Complex64> {
        let r = integrate_momentum(
            |p| self.transmitted_amplitude(p) * weight(p) * Self::free_phase(p, x, t),
            &self.state.supports(),
            self.phase_rate(x, t),
            &self.quad,
        )?;
        Ok(r.value)
    }

    /// `I[1]`, `I[p]`, `I[√p]` in one pass over a shared set of nodes.
    pub fn functionals(&self, x: f64, t: f64) -> Result<Functionals> {
        let r = integrate_momentum(
            |p| {
                let base = self.transmitted_amplitude(p) * Self::free_phase(p, x, t);
                [base, base * p, base * p.max(0.0).sqrt()]
            },
            &self.state.supports(),
            self.phase_rate(x, t),
            &self.quad,
        )?;
        let [one, momentum, sqrt_momentum] = r.value;
        Ok(Functionals { one, momentum, sqrt_momentum })
    }

    pub fn expectation_j(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.functionals(x, t)?.current())
    }

    pub fn expectation_jplus(&self, x: f64, t: f64) -> Result<f64> {
        let i = self.functional(|p| Weight::SqrtMomentum.eval(p), x, t)?;
        Ok(i.norm_sqr() / (MASS * H))
    }

    fn require_transmission(&self) -> Result<()> {
        if !(self.transmittance > 0.0) {
            return Err(Error::Degenerate(format!(
                "transmittance is {:e}; the barrier reflects everything",
                self.transmittance
            )));
        }
        Ok(())
    }

    /// `P_X(t) = ⟨J⁺⟩ / 𝖳`.
    pub fn arrival_distribution(&self, x: f64, t: f64) -> Result<f64> {
        self.require_transmission()?;
        Ok(self.expectation_jplus(x, t)? / self.transmittance)
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<CurrentSample> {
        self.require_transmission()?;
        let f = self.functionals(x, t)?;
        let j_plus = f.positive_current();
        Ok(CurrentSample { t, j: f.current(), j_plus, p_x: j_plus / self.transmittance })
    }

    /// `ψ_tr(x, t) = (2πħ)^(-1/2) I[1](x, t)`.
    pub fn transmitted_wavefunction(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.functional(|_| 1.0, x, t)? / (2.0 * PI * HBAR).sqrt())
    }

    pub fn transmitted_position_density(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.transmitted_wavefunction(x, t)?.norm_sqr())
    }

    /// Lowest and highest momentum covered by the state's supports.
    pub fn momentum_span(&self) -> (f64, f64) {
        let ivs = support_intervals(&self.state.supports(), self.quad.n_sigma);
        let lo = ivs.iter().map(|iv| iv.0).fold(f64::INFINITY, f64::min);
        let hi = ivs.iter().map(|iv| iv.1).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Positions outside which the transmitted density at time `t` is
    /// negligible: the classical flight of the extreme momenta, padded by
    /// `n_sigma` spreads of the freely spreading packet and by the barrier's
    /// delay scale.
    pub fn spatial_extent(&self, t: f64) -> (f64, f64) {
        let (p_lo, p_hi) = self.momentum_span();
        let dp = self.state.dp();
        let spread = HBAR / (2.0 * dp) * (1.0 + (2.0 * dp * dp * t / (MASS * HBAR)).powi(2)).sqrt();
        let pad = self.quad.n_sigma * spread + 10.0 * self.model.right_edge();
        let x0 = self.state.x0();
        let a = x0 + p_lo * t / MASS;
        let b = x0 + p_hi * t / MASS + self.model.right_edge();
        (a.min(b) - pad, a.max(b) + pad)
    }

    /// `∫|ψ_tr(x, t)|² dx` over `(−∞, bound]` or `[bound, ∞)`.
    pub fn position_tail_probability(&self, bound: f64, side: Side, t: f64) -> Result<f64> {
        let (lo, hi) = self.spatial_extent(t);
        let (a, b) = match side {
            Side::Below => (lo, bound.min(hi)),
            Side::Above => (bound.max(lo), hi),
        };
        if b <= a {
            return Ok(0.0);
        }
        self.density_integral(a, b, t)
    }

    /// `∫_a^b |ψ_tr(x, t)|² dx`, doubling both the position and the
    /// momentum grid until successive levels agree.
    fn density_integral(&self, a: f64, b: f64, t: f64) -> Result<f64> {
        let quad = &self.quad;
        let x0 = self.state.x0();
        let edge = self.model.right_edge();
        let rate = move |p: f64| {
            ((a - x0 - p * t / MASS).abs().max((b - x0 - p * t / MASS).abs()) + edge) / HBAR
        };
        let momentum: Vec<(f64, f64, usize)> = support_intervals(&self.state.supports(), quad.n_sigma)
            .into_iter()
            .map(|(lo, hi, w)| (lo, hi, initial_panels(lo, hi, w, &rate, quad)))
            .collect();
        let (p_lo, p_hi) = self.momentum_span();
        // |ψ|² oscillates at most with wavenumber (p_hi − p_lo)/ħ
        let spread = HBAR / (2.0 * self.state.dp());
        let x_panels = initial_panels(a, b, spread, &|_| (p_hi - p_lo) / HBAR, quad);
        let base = x_panels + momentum.iter().map(|iv| iv.2).sum::<usize>();

        let level = |scale: usize| -> (f64, f64) {
            let mut nodes = Vec::new();
            let mut coeffs = Vec::new();
            for &(lo, hi, n) in &momentum {
                let (ps, ws) = composite_rule(lo, hi, n * scale);
                for (p, w) in ps.into_iter().zip(ws) {
                    let phase = Complex64::from_polar(1.0, -p * p * t / (2.0 * MASS * HBAR));
                    coeffs.push(self.transmitted_amplitude(p) * phase * w / (2.0 * PI * HBAR).sqrt());
                    nodes.push(p);
                }
            }
            let (xs, wx) = composite_rule(a, b, x_panels * scale);
            let densities: Vec<f64> = xs
                .par_iter()
                .map(|&x| {
                    nodes
                        .iter()
                        .zip(&coeffs)
                        .map(|(&p, c)| c * Complex64::from_polar(1.0, p * x / HBAR))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect();
            let total: f64 = densities.iter().zip(&wx).map(|(d, w)| d * w).sum();
            (total, 64.0 * f64::EPSILON * total.abs())
        };

        let mut scale = 1;
        let (mut coarse, _) = level(scale);
        loop {
            if 2 * scale * base > quad.max_panels {
                return Err(Error::Numerical {
                    context: format!("position integral on [{a:.3}, {b:.3}] at t = {t}"),
                    achieved: f64::NAN,
                    requested: quad.rel_tol,
                });
            }
            scale *= 2;
            let (fine, floor) = level(scale);
            let diff = (fine - coarse).abs();
            if diff <= (quad.rel_tol * fine.abs()).max(quad.abs_tol * 1e-6).max(floor) {
                return Ok(fine);
            }
            coarse = fine;
        }
    }
}
