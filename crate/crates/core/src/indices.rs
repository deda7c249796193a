//! Sampled performance indices: fixed-grid traces, overshoot extraction,
//! and trapezoid integral squared error.
//!
//! Every tuning chart and table entry rests on the same convention: the
//! horizon `[0, t_s]` is sampled on a uniform grid (0.01 delay units between
//! points for the standard horizon of seven, i.e. 701 samples), overshoot is
//! the magnitude of the deepest excursion below zero, and the integral
//! squared error is the trapezoid rule over the same samples.

use crate::error::{Error, Result};
use crate::model::PerformanceIndices;

/// Standard sample spacing (delay units).
pub const STANDARD_SPACING: f64 = 0.01;

/// A uniformly sampled response, optionally with the controller output.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrace {
    /// Grid spacing.
    pub dt: f64,
    /// Response samples `y(k·dt)`.
    pub y: Vec<f64>,
    /// Controller-output samples `v(k·dt)` when sampled.
    pub v: Option<Vec<f64>>,
}

fn sample_values<F>(mut f: F, t_s: f64, n: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least two samples, got {n}")));
    }
    if !t_s.is_finite() || t_s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "the sampling horizon must be positive, got {t_s}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * t_s / (n - 1) as f64;
        let value = f(t)?;
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!("sampled value at t = {t} is not finite")));
        }
        out.push(value);
    }
    Ok(out)
}

impl SampledTrace {
    /// Samples `y` on `n` evenly spaced points covering `[0, t_s]`.
    pub fn sample<F>(y_fn: F, t_s: f64, n: usize) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let y = sample_values(y_fn, t_s, n)?;
        Ok(SampledTrace { dt: t_s / (n - 1) as f64, y, v: None })
    }

    /// Samples `y` and the controller output `v` on the same grid.
    pub fn sample_with_output<F, G>(y_fn: F, v_fn: G, t_s: f64, n: usize) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
        G: FnMut(f64) -> Result<f64>,
    {
        let y = sample_values(y_fn, t_s, n)?;
        let v = sample_values(v_fn, t_s, n)?;
        Ok(SampledTrace { dt: t_s / (n - 1) as f64, y, v: Some(v) })
    }

    /// Number of grid points for `[0, t_s]` at the standard spacing.
    pub fn standard_count(t_s: f64) -> usize {
        (t_s / STANDARD_SPACING).round() as usize + 1
    }

    /// Whether this trace uses the standard 0.01 spacing.
    pub fn is_standard_spacing(&self) -> bool {
        (self.dt - STANDARD_SPACING).abs() < 1e-12
    }

    /// Grid times.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = self.dt;
        (0..self.y.len()).map(move |k| k as f64 * dt)
    }
}

/// Overshoot of a sampled signal: the magnitude of the deepest excursion
/// below zero (zero when the signal never goes negative).
pub fn overshoot(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, &v| m.max(-v))
}

/// Trapezoid integral of the squared samples.
pub fn ise_trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|&v| v * v).sum();
    let ends = 0.5 * (values[0] * values[0] + values[values.len() - 1] * values[values.len() - 1]);
    dt * (sum - ends)
}

/// All sampled indices of a trace; the trace must carry the controller
/// output (the band index `po_b` is left to the controller that defines it).
pub fn indices(trace: &SampledTrace) -> Result<PerformanceIndices> {
    let v = trace
        .v
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("trace has no controller-output samples".into()))?;
    Ok(PerformanceIndices {
        po_y: overshoot(&trace.y),
        po_v: overshoot(v),
        po_b: None,
        ise: ise_trapezoid(&trace.y, trace.dt),
    })
}
