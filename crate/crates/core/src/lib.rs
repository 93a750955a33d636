//! Arrival-time distributions for one-dimensional wave packets.
//!
//! Two candidate distributions of the time at which a particle reaches a
//! detector at `X` are computed and compared:
//!
//! * the probability current `⟨J(X)⟩(t)`, which may go negative, and
//! * the positive-definite current `⟨J⁺(X)⟩(t) = |I[√p]|² / (m h)`, whose
//!   normalization by the transmittance gives the arrival distribution
//!   `P_X(t)`.
//!
//! Everything is expressed in atomic units. States are built in momentum
//! space ([`state`]), optionally filtered through a rectangular barrier
//! ([`scattering`]), and propagated freely by an explicit momentum integral
//! ([`observables`]). The [`analytic`] module carries the closed forms for
//! free Gaussians, [`comparison`] scans and diagnoses the relative
//! difference `Δ = 1 − ⟨J⟩/⟨J⁺⟩`, and [`protocol`] solves the implicit
//! conditions that place the packet, the detector, and the detection window.

pub mod analytic;
pub mod comparison;
mod error;
pub mod observables;
pub mod protocol;
pub mod quadrature;
pub mod scattering;
pub mod state;
pub mod units;

pub use error::{Error, Result};
pub use observables::{CurrentSample, Experiment};
pub use quadrature::QuadratureSpec;
pub use scattering::ScatteringModel;
pub use state::{GaussianPacket, InitialState, SuperpositionState};
