use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters that cannot describe a physical state.
    #[error("unphysical state: {0}")]
    Unphysical(String),

    /// Quadrature or iteration did not reach the requested accuracy.
    #[error("numerical failure in {context}: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Numerical {
        context: String,
        achieved: f64,
        requested: f64,
    },

    /// A root solver was handed an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The scenario cannot produce a meaningful answer (e.g. zero transmittance).
    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}
