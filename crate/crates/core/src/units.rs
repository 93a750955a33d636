//! Atomic units.
//!
//! `ħ = m = 1` for an electron. Planck's constant `h = 2πħ` is kept as its
//! own symbol wherever a current carries the `1/(m h)` prefactor.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub h: f64,
}

impl PhysicalConstants {
    pub const ATOMIC: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        mass: MASS,
        h: H,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::ATOMIC
    }
}

pub const HBAR: f64 = 1.0;
pub const MASS: f64 = 1.0;
pub const H: f64 = 2.0 * PI * HBAR;
