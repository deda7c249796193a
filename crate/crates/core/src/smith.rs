//! Closed-form response and performance indices for the Smith-predictor
//! loop.
//!
//! With the delay compensated by the predictor, the loop transfer collapses
//! to a plain second-order system: for the unit-to-zero setpoint step from
//! the settled state the response is `y ≡ 1` on `[0, 1]`, followed by the
//! delayed free response `y(t) = w(t−1)` of
//!
//! ```text
//! t_p·w″ + (1 + h)·w′ + h_i·w = 0,   w(0) = 1, w′(0) = 0,
//! ```
//!
//! which in the underdamped case is `w(t) = e^(−at)·(cos bt + (a/b)·sin bt)`
//! with `a = (1+h)/(2t_p)` and `b = sqrt(4·h_i·t_p − (1+h)²)/(2t_p)`. Every
//! index (overshoots, integral squared error) then has an exact expression;
//! this module is therefore the analytic anchor the sampled pipeline is
//! checked against.

use crate::error::{Error, Result};
use crate::model::{ControllerGains, PerformanceIndices};

/// Smallest oscillation rate `b` the closed forms are evaluated at; below
/// this the `1/b` factors lose all precision and the loop is effectively
/// critically damped.
const MIN_OSCILLATION_RATE: f64 = 1e-6;

/// Decay/oscillation pair of the predictor-compensated loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpDamping {
    /// Exponential decay rate `a = (1+h)/(2t_p)`.
    pub a: f64,
    /// Oscillation rate `b` (zero when not underdamped).
    pub b: f64,
    /// Signed discriminant `4·h_i·t_p − (1+h)²`; positive means
    /// underdamped.
    pub discriminant: f64,
}

impl SpDamping {
    /// True when the loop oscillates strongly enough for the closed forms.
    pub fn is_underdamped(&self) -> bool {
        self.b > MIN_OSCILLATION_RATE
    }
}

fn check_time_constant(t_p: f64) -> Result<()> {
    if !t_p.is_finite() || t_p <= 0.0 {
        return Err(Error::UnsupportedTimeConstant {
            t_p,
            reason: "the predictor loop closed forms need a positive time constant",
        });
    }
    Ok(())
}

/// Computes the decay/oscillation pair; succeeds for any gains (the
/// discriminant is reported signed so callers can see how far from
/// the oscillatory regime they are).
pub fn sp_damping(gains: ControllerGains, t_p: f64) -> Result<SpDamping> {
    check_time_constant(t_p)?;
    let a = (1.0 + gains.h) / (2.0 * t_p);
    let discriminant = 4.0 * gains.h_i * t_p - (1.0 + gains.h) * (1.0 + gains.h);
    let b = if discriminant > 0.0 { discriminant.sqrt() / (2.0 * t_p) } else { 0.0 };
    Ok(SpDamping { a, b, discriminant })
}

fn underdamped(gains: ControllerGains, t_p: f64) -> Result<SpDamping> {
    let damping = sp_damping(gains, t_p)?;
    if !damping.is_underdamped() {
        return Err(Error::Overdamped { discriminant: damping.discriminant });
    }
    Ok(damping)
}

/// Exact unit-to-zero step response of the predictor loop.
#[derive(Debug, Clone, Copy)]
pub struct SpResponse {
    /// Normalized plant time constant.
    pub t_p: f64,
    /// Controller gains.
    pub gains: ControllerGains,
    /// Decay/oscillation pair.
    pub damping: SpDamping,
}

/// Builds the closed-form response; the loop must be underdamped.
pub fn sp_response(gains: ControllerGains, t_p: f64) -> Result<SpResponse> {
    Ok(SpResponse { t_p, gains, damping: underdamped(gains, t_p)? })
}

impl SpResponse {
    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::OutOfRange { t, lo: 0.0, hi: f64::INFINITY });
        }
        Ok(())
    }

    /// Response value `y(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if t <= 1.0 {
            return Ok(1.0);
        }
        let SpDamping { a, b, .. } = self.damping;
        let s = t - 1.0;
        Ok((-a * s).exp() * ((b * s).cos() + (a / b) * (b * s).sin()))
    }

    /// Response slope `y′(t)`.
    pub fn eval_deriv(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if t <= 1.0 {
            return Ok(0.0);
        }
        let SpDamping { a, b, .. } = self.damping;
        let s = t - 1.0;
        Ok(-(-a * s).exp() * ((a * a + b * b) / b) * (b * s).sin())
    }

    /// Controller output `v(t) = y(t+1) + t_p·y′(t+1)`, which starts at the
    /// settled value one: the step enters the loop without a proportional
    /// kick because only the response itself is delayed into the plant.
    pub fn control_output(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let SpDamping { a, b, .. } = self.damping;
        let c = (self.t_p * (a * a + b * b) - a) / b;
        Ok((-a * t).exp() * ((b * t).cos() - c * (b * t).sin()))
    }
}

/// Exact overshoot pair `(po_y, po_v)`.
///
/// The response bottoms out at `−e^(−πa/b)` half an oscillation period after
/// the delay; the output bottoms at phase `φ = atan2(b·t_p, a·t_p − 1)` with
/// magnitude `e^(−φa/b)·sqrt((1 − a·t_p)² + (t_p·b)²)`.
pub fn sp_overshoots(gains: ControllerGains, t_p: f64) -> Result<(f64, f64)> {
    let SpDamping { a, b, .. } = underdamped(gains, t_p)?;
    let po_y = (-std::f64::consts::PI * a / b).exp();
    let phi = (b * t_p).atan2(a * t_p - 1.0);
    let amp = ((1.0 - a * t_p).powi(2) + (t_p * b).powi(2)).sqrt();
    let po_v = (-phi * a / b).exp() * amp;
    Ok((po_y, po_v))
}

/// Antiderivative of `w(t−1)²` used by the exact integral-squared-error
/// expression (valid for `t ≥ 1`).
fn ise_accumulator(a: f64, b: f64, t: f64) -> f64 {
    let s = t - 1.0;
    let r2 = a * a + b * b;
    let envelope = (-2.0 * a * s).exp() / (4.0 * a * b * b * r2);
    envelope
        * (-r2 * r2
            + a * a * (a * a - 3.0 * b * b) * (2.0 * b * s).cos()
            + a * b * (b * b - 3.0 * a * a) * (2.0 * b * s).sin())
}

/// Exact integral of `y²` over `[0, t_s]` for the unit-to-zero step.
pub fn sp_ise(gains: ControllerGains, t_p: f64, t_s: f64) -> Result<f64> {
    if !t_s.is_finite() || t_s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "the index horizon must be positive, got {t_s}"
        )));
    }
    let SpDamping { a, b, .. } = underdamped(gains, t_p)?;
    let flat = t_s.min(1.0);
    let tail = if t_s > 1.0 {
        ise_accumulator(a, b, t_s) - ise_accumulator(a, b, 1.0)
    } else {
        0.0
    };
    Ok(flat + tail)
}

/// All closed-form indices in one struct (`po_b` does not apply here).
pub fn sp_indices(gains: ControllerGains, t_p: f64, t_s: f64) -> Result<PerformanceIndices> {
    let (po_y, po_v) = sp_overshoots(gains, t_p)?;
    let ise = sp_ise(gains, t_p, t_s)?;
    Ok(PerformanceIndices { po_y, po_v, po_b: None, ise })
}
