//! Free propagation or a rectangular barrier on `[0, d]`.
//!
//! The transmission amplitude follows the convention that an incident wave
//! `e^{ipx/ħ}` emerges for `x > d` as `T(p)·e^{ipx/ħ}`.

use num_complex::Complex64;

use crate::quadrature::{integrate_momentum, QuadratureSpec};
use crate::state::InitialState;
use crate::units::{HBAR, MASS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangularBarrier {
    width: f64,
    height: f64,
}

impl RectangularBarrier {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Domain(format!("barrier width must be positive, got {width}")));
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::Domain(format!("barrier height must be positive, got {height}")));
        }
        Ok(RectangularBarrier { width, height })
    }

    /// Barrier whose height corresponds to the momentum `p_B = √(2mV₀)`.
    pub fn from_momentum(width: f64, p_barrier: f64) -> Result<Self> {
        Self::new(width, p_barrier * p_barrier / (2.0 * MASS))
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn p_barrier(&self) -> f64 {
        (2.0 * MASS * self.height).sqrt()
    }

    /// `cosh(κd)` and `sinh(κd)/κ` as functions of `κ² = (2mV₀ − p²)/ħ²`.
    /// Both are even in `κ`, so they stay real across `p = p_B` where `κ`
    /// turns imaginary.
    fn propagator_entries(&self, kappa_sq: f64) -> (f64, f64) {
        let d = self.width;
        if kappa_sq > 0.0 {
            let s = kappa_sq.sqrt();
            ((s * d).cosh(), (s * d).sinh() / s)
        } else if kappa_sq < 0.0 {
            let s = (-kappa_sq).sqrt();
            ((s * d).cos(), (s * d).sin() / s)
        } else {
            (1.0, d)
        }
    }

    fn transmission(&self, p: f64) -> Complex64 {
        let k = p / HBAR;
        let kappa_sq = (2.0 * MASS * self.height - p * p) / (HBAR * HBAR);
        let (c, s) = self.propagator_entries(kappa_sq);
        let denominator = Complex64::new(c, (kappa_sq - k * k) * s / (2.0 * k));
        Complex64::from_polar(1.0, -k * self.width) / denominator
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ScatteringModel {
    #[default]
    Free,
    RectangularBarrier(RectangularBarrier),
}

impl ScatteringModel {
    pub fn barrier(width: f64, p_barrier: f64) -> Result<Self> {
        RectangularBarrier::from_momentum(width, p_barrier).map(ScatteringModel::RectangularBarrier)
    }

    /// Right edge of the interaction region (0 for free motion).
    pub fn right_edge(&self) -> f64 {
        match self {
            ScatteringModel::Free => 0.0,
            ScatteringModel::RectangularBarrier(b) => b.width,
        }
    }

    pub fn transmission_amplitude(&self, p: f64) -> Result<Complex64> {
        if !(p > 0.0) {
            return Err(Error::Domain(format!("transmission amplitude needs p > 0, got {p}")));
        }
        Ok(self.transmission_unchecked(p))
    }

    /// `T(p)` for `p > 0`; callers guarantee the domain.
    pub(crate) fn transmission_unchecked(&self, p: f64) -> Complex64 {
        match self {
            ScatteringModel::Free => Complex64::new(1.0, 0.0),
            ScatteringModel::RectangularBarrier(b) => b.transmission(p),
        }
    }

    /// Transmittance `∫₀^∞ |T(p)|² |⟨p|ψ_in⟩|² dp`.
    pub fn transmittance(&self, state: &InitialState, quad: &QuadratureSpec) -> Result<f64> {
        let r = integrate_momentum(
            |p| {
                if p > 0.0 {
                    self.transmission_unchecked(p).norm_sqr() * state.amplitude(p).norm_sqr()
                } else {
                    0.0
                }
            },
            &state.supports(),
            |_| 0.0,
            quad,
        )?;
        Ok(r.value)
    }
}
