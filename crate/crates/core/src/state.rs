//! Momentum-space initial states: minimum-uncertainty Gaussian packets and
//! two-packet superpositions `α(β|ψ₁⟩ + |ψ₂⟩)`.

use std::f64::consts::{PI, SQRT_2};

use log::warn;
use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::quadrature::Support;
use crate::units::HBAR;
use crate::{Error, Result};

/// Negative-momentum probability above which construction logs a warning.
pub const NEGATIVE_WEIGHT_THRESHOLD: f64 = 1e-6;

/// Minimum Gaussian wave packet centred at `x0` with mean momentum
/// `p_center` and momentum spread `dp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    p_center: f64,
    dp: f64,
    x0: f64,
}

impl GaussianPacket {
    pub fn new(p_center: f64, dp: f64, x0: f64) -> Result<Self> {
        if !(dp > 0.0 && dp.is_finite()) {
            return Err(Error::Unphysical(format!("momentum spread must be positive, got {dp}")));
        }
        if !(p_center > 0.0 && p_center.is_finite()) {
            return Err(Error::Unphysical(format!(
                "mean momentum must be positive, got {p_center}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::Unphysical(format!("centroid must be finite, got {x0}")));
        }
        let packet = GaussianPacket { p_center, dp, x0 };
        let w = packet.negative_momentum_weight();
        if w > NEGATIVE_WEIGHT_THRESHOLD {
            warn!("Gaussian packet (p0 = {p_center}, dp = {dp}) carries negative-momentum weight {w:.3e}");
        }
        Ok(packet)
    }

    pub fn p_center(&self) -> f64 {
        self.p_center
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Spatial spread `Δx = ħ / (2Δp)`.
    pub fn dx(&self) -> f64 {
        HBAR / (2.0 * self.dp)
    }

    pub fn with_x0(self, x0: f64) -> Self {
        GaussianPacket { x0, ..self }
    }

    /// `⟨p|ψ⟩ = [2π(Δp)²]^(-1/4) exp[-((p - p₀)/2Δp)² - i p x₀/ħ]`.
    pub fn amplitude(&self, p: f64) -> Complex64 {
        let u = (p - self.p_center) / (2.0 * self.dp);
        let modulus = (2.0 * PI * self.dp * self.dp).powf(-0.25) * (-u * u).exp();
        Complex64::from_polar(modulus, -p * self.x0 / HBAR)
    }

    /// `∫_{-∞}^0 |⟨p|ψ⟩|² dp`.
    pub fn negative_momentum_weight(&self) -> f64 {
        0.5 * erfc(self.p_center / (SQRT_2 * self.dp))
    }
}

/// Overlap `⟨ψ₁|ψ₂⟩` of two Gaussians with equal width and centroid.
pub fn gaussian_overlap(p1: f64, p2: f64, dp: f64) -> f64 {
    let d = p1 - p2;
    (-d * d / (8.0 * dp * dp)).exp()
}

/// Normalization `α = (β² + 2β·overlap + 1)^(-1/2)` of `α(β|ψ₁⟩ + |ψ₂⟩)`.
pub fn normalization_alpha(beta: f64, overlap: f64) -> Result<f64> {
    let norm = beta * beta + 2.0 * beta * overlap + 1.0;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Unphysical(format!(
            "superposition norm {norm} is not positive (beta = {beta}, overlap = {overlap})"
        )));
    }
    Ok(norm.powf(-0.5))
}

/// `α(β|ψ₁⟩ + |ψ₂⟩)` with equal-width Gaussians sharing one centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionState {
    beta: f64,
    packet1: GaussianPacket,
    packet2: GaussianPacket,
    alpha: f64,
}

impl SuperpositionState {
    /// Requires `p2 ≥ p1 > 0`.
    pub fn new(beta: f64, p1: f64, p2: f64, dp: f64, x0: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Unphysical(format!("beta must be finite, got {beta}")));
        }
        if !(p2 >= p1) {
            return Err(Error::Unphysical(format!("need p2 >= p1, got p1 = {p1}, p2 = {p2}")));
        }
        let packet1 = GaussianPacket::new(p1, dp, x0)?;
        let packet2 = GaussianPacket::new(p2, dp, x0)?;
        let alpha = normalization_alpha(beta, gaussian_overlap(p1, p2, dp))?;
        Ok(SuperpositionState { beta, packet1, packet2, alpha })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn packet1(&self) -> &GaussianPacket {
        &self.packet1
    }

    pub fn packet2(&self) -> &GaussianPacket {
        &self.packet2
    }

    pub fn overlap(&self) -> f64 {
        gaussian_overlap(self.packet1.p_center, self.packet2.p_center, self.packet1.dp)
    }

    pub fn amplitude(&self, p: f64) -> Complex64 {
        self.alpha * (self.beta * self.packet1.amplitude(p) + self.packet2.amplitude(p))
    }

    /// Closed form: the cross term is a Gaussian of width `Δp/√2` about the
    /// mean of the two centres, scaled by the overlap.
    pub fn negative_momentum_weight(&self) -> f64 {
        let dp = self.packet1.dp;
        let mid = 0.5 * (self.packet1.p_center + self.packet2.p_center);
        let cross = self.overlap() * 0.5 * erfc(mid / (SQRT_2 * dp));
        self.alpha
            * self.alpha
            * (self.beta * self.beta * self.packet1.negative_momentum_weight()
                + self.packet2.negative_momentum_weight()
                + 2.0 * self.beta * cross)
    }
}

/// Initial state `⟨p|ψ_in⟩` of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Gaussian(GaussianPacket),
    Superposition(SuperpositionState),
}

impl InitialState {
    pub fn amplitude(&self, p: f64) -> Complex64 {
        match self {
            InitialState::Gaussian(g) => g.amplitude(p),
            InitialState::Superposition(s) => s.amplitude(p),
        }
    }

    pub fn negative_momentum_weight(&self) -> f64 {
        match self {
            InitialState::Gaussian(g) => g.negative_momentum_weight(),
            InitialState::Superposition(s) => s.negative_momentum_weight(),
        }
    }

    /// Gaussian components, one `(center, width)` per packet.
    pub fn supports(&self) -> Vec<Support> {
        match self {
            InitialState::Gaussian(g) => vec![Support::new(g.p_center, g.dp)],
            InitialState::Superposition(s) => vec![
                Support::new(s.packet1.p_center, s.packet1.dp),
                Support::new(s.packet2.p_center, s.packet2.dp),
            ],
        }
    }

    pub fn x0(&self) -> f64 {
        match self {
            InitialState::Gaussian(g) => g.x0,
            InitialState::Superposition(s) => s.packet1.x0,
        }
    }

    pub fn dp(&self) -> f64 {
        match self {
            InitialState::Gaussian(g) => g.dp,
            InitialState::Superposition(s) => s.packet1.dp,
        }
    }

    /// Momentum used for classical flight times: the packet centre, or the
    /// faster component of a superposition.
    pub fn reference_momentum(&self) -> f64 {
        match self {
            InitialState::Gaussian(g) => g.p_center,
            InitialState::Superposition(s) => s.packet2.p_center,
        }
    }

    pub fn with_x0(self, x0: f64) -> Self {
        match self {
            InitialState::Gaussian(g) => InitialState::Gaussian(g.with_x0(x0)),
            InitialState::Superposition(s) => InitialState::Superposition(SuperpositionState {
                packet1: s.packet1.with_x0(x0),
                packet2: s.packet2.with_x0(x0),
                ..s
            }),
        }
    }
}

impl From<GaussianPacket> for InitialState {
    fn from(g: GaussianPacket) -> Self {
        InitialState::Gaussian(g)
    }
}

impl From<SuperpositionState> for InitialState {
    fn from(s: SuperpositionState) -> Self {
        InitialState::Superposition(s)
    }
}
