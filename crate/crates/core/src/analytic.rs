//! Closed forms for a single minimum-uncertainty Gaussian moving freely,
//! the second-order expansion of `⟨J⁺⟩` about the current, and the leading
//! interference term of a two-packet superposition.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::state::{GaussianPacket, SuperpositionState};
use crate::units::{H, HBAR, MASS};
use crate::{Error, Result};

/// Parameters of the Gaussian integral `I[1] = N ∫ e^{−δ(p−λ)²} dp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLambda {
    pub delta: Complex64,
    pub lambda: Complex64,
}

pub fn delta_lambda(packet: &GaussianPacket, x: f64, t: f64) -> DeltaLambda {
    let dp2 = packet.dp() * packet.dp();
    let delta = Complex64::new(1.0 / (4.0 * dp2), t / (2.0 * MASS * HBAR));
    let lambda = Complex64::new(packet.p_center(), 2.0 * dp2 * (x - packet.x0()) / HBAR)
        / Complex64::new(1.0, 2.0 * dp2 * t / (MASS * HBAR));
    DeltaLambda { delta, lambda }
}

/// `I[1](X, t)` integrated over the whole momentum line.
pub fn gaussian_functional(packet: &GaussianPacket, x: f64, t: f64) -> Complex64 {
    let DeltaLambda { delta, lambda } = delta_lambda(packet, x, t);
    let dp = packet.dp();
    let norm = (2.0 * PI * dp * dp).powf(-0.25);
    let p0 = packet.p_center();
    norm * (delta * lambda * lambda - p0 * p0 / (4.0 * dp * dp)).exp() * (PI / delta).sqrt()
}

/// The textbook current of a freely spreading Gaussian.
pub fn closed_form_current(packet: &GaussianPacket, x: f64, t: f64) -> f64 {
    let dp = packet.dp();
    let p0 = packet.p_center();
    let dx = x - packet.x0();
    let dp4 = dp.powi(4);
    let spread = 1.0 + 4.0 * dp4 * t * t / (MASS * MASS * HBAR * HBAR);
    let drift = p0 + 4.0 * dp4 * dx * t / (MASS * HBAR * HBAR);
    let lag = dx - p0 * t / MASS;
    (2.0 / PI).sqrt() * dp / (MASS * HBAR) * drift / spread.powf(1.5)
        * (-2.0 * dp * dp / (HBAR * HBAR) * lag * lag / spread).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxCoefficients {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl ApproxCoefficients {
    /// `1 + Λ₀ − Λ₁t + Λ₂t²`.
    pub fn factor(&self, t: f64) -> f64 {
        1.0 + self.lambda0 - self.lambda1 * t + self.lambda2 * t * t
    }
}

pub fn lambda_coefficients(packet: &GaussianPacket, x: f64) -> ApproxCoefficients {
    let dp = packet.dp();
    let p0 = packet.p_center();
    let dx = x - packet.x0();
    let dp4 = dp.powi(4);
    let hb2 = HBAR * HBAR;
    ApproxCoefficients {
        lambda0: -0.5 * (dp / p0).powi(2) + 2.0 * dp4 * dx * dx / (hb2 * p0 * p0),
        lambda1: 4.0 * dp4 * dx / (MASS * p0 * hb2),
        lambda2: 2.0 * dp4 / (MASS * MASS * hb2),
    }
}

/// `t₀ = (X − x₀)m/p₀`.
pub fn classical_arrival(packet: &GaussianPacket, x: f64) -> f64 {
    (x - packet.x0()) * MASS / packet.p_center()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityWindow {
    /// Detector distance in units of the initial spatial spread `ħ/2Δp`.
    pub rho: f64,
    pub sigma: f64,
    pub t_range: (f64, f64),
}

impl ValidityWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_range.0 && t <= self.t_range.1
    }
}

pub fn validity_window(packet: &GaussianPacket, x: f64) -> Result<ValidityWindow> {
    let dx = x - packet.x0();
    if !(dx > 0.0) {
        return Err(Error::Domain(format!("detector must lie beyond the packet centre, X − x₀ = {dx}")));
    }
    let rho = dx * 2.0 * packet.dp() / HBAR;
    let sigma = (2.0 / rho).min((2.0 / rho).powi(2));
    Ok(ValidityWindow { rho, sigma, t_range: (0.0, sigma * classical_arrival(packet, x)) })
}

/// Second-order `⟨J⁺⟩` together with whether `t` lies in the window
/// where the expansion is trustworthy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrder {
    pub value: f64,
    pub in_window: bool,
}

pub fn jplus_second_order(packet: &GaussianPacket, x: f64, t: f64) -> SecondOrder {
    let value = lambda_coefficients(packet, x).factor(t) * closed_form_current(packet, x, t);
    let in_window = validity_window(packet, x).map(|w| w.contains(t)).unwrap_or(false);
    SecondOrder { value, in_window }
}

/// `Λ₂(t − t₀)² − ½(Δp/p₀)²`.
pub fn delta_parabola(packet: &GaussianPacket, x: f64, t: f64) -> f64 {
    let c = lambda_coefficients(packet, x);
    let t0 = classical_arrival(packet, x);
    c.lambda2 * (t - t0).powi(2) - 0.5 * (packet.dp() / packet.p_center()).powi(2)
}

/// Leading interference term of `⟨J⟩` for `α(βφ₁ + φ₂)` with
/// `p₂/p₁ ≫ β ≫ 1` and vanishing `Δp`.
pub fn interference_current_leading(state: &SuperpositionState, x: f64, t: f64) -> f64 {
    let p2 = state.packet2().p_center();
    let dp = state.packet2().dp();
    let alpha = state.alpha();
    let x0 = state.packet2().x0();
    let phase = p2 * p2 * t / (2.0 * HBAR * MASS) - p2 * (x - x0) / HBAR;
    2.0 * (2.0 * PI).sqrt() / (MASS * H) * state.beta() * alpha * alpha * dp * p2 * phase.cos()
}
