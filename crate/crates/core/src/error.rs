//! Shared error type for the whole crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes reported by the library.
///
/// The policy throughout is to refuse a computation rather than return
/// garbage: out-of-domain parameters, ill-conditioned coefficient growth and
/// diverging integrations all surface as explicit variants.
#[derive(Debug, Error)]
pub enum Error {
    /// A plant description violated its invariants (`L > 0`, `K != 0`,
    /// `T_p >= 0`).
    #[error("invalid plant: {0}")]
    InvalidPlant(String),

    /// A gain pair violated its invariants (`h >= 0`, `h_i >= 0`, finite).
    #[error("invalid gains: {0}")]
    InvalidGains(String),

    /// No integral gain stabilizes the loop at this proportional gain.
    #[error("no stabilizing integral gain exists at h = {h} for t_p = {t_p}")]
    NoStableIntegralGain { h: f64, t_p: f64 },

    /// The normalized time constant is outside the range a routine supports.
    #[error("unsupported normalized time constant t_p = {t_p}: {reason}")]
    UnsupportedTimeConstant { t_p: f64, reason: &'static str },

    /// A closed-form response requires an underdamped (oscillatory) loop.
    #[error("response is not underdamped (discriminant {discriminant:.6e})")]
    Overdamped { discriminant: f64 },

    /// Evaluation was requested outside the covered time range.
    #[error("t = {t} lies outside the covered range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// Piecewise coefficients grew beyond the trusted magnitude.
    #[error("ill-conditioned coefficients: |{value:.3e}| exceeds {limit:.1e}")]
    IllConditioned { value: f64, limit: f64 },

    /// A brute-force integration produced a non-finite state.
    #[error("integration diverged at t = {t}")]
    Diverged { t: f64 },

    /// A tuning procedure has no solution under the requested presets.
    #[error("infeasible tuning: {0}")]
    Infeasible(String),

    /// Any other invalid argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// File output failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
