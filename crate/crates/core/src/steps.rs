//! Exact method-of-steps solver for the closed-loop delay differential
//! equation
//!
//! ```text
//! t_p·y″(t) + y′(t) = h_i·(r(t−1) − y(t−1)) − h·y′(t−1)
//! ```
//!
//! where the setpoint `r` steps between two constants at `t = 0` and the
//! unit-delay history is given on `[−1, 0]`. On every interval between
//! breakpoints the solution is a polynomial plus `e^(−τ/t_p)` times a
//! polynomial in the segment-local time `τ`; stepping across one delay turns
//! the previous interval's coefficients into the next interval's forcing, so
//! the solution is exact up to floating-point rounding — no discretization
//! is involved.
//!
//! The setpoint step's delta in `r′` is dropped (only `r` itself is delayed
//! into the loop), which keeps `y` and `y′` continuous at every joint; this
//! matches the convention under which the controller output `v(0) = 1` for
//! the unit-to-zero step scenario.

use crate::error::{Error, Result};
use crate::model::ControllerGains;

/// Largest magnitude allowed for any basis coefficient before the solver
/// refuses to continue. Coefficients of opposite sign cancel to an O(1)
/// response value, so the rounding error of an admitted answer is roughly
/// this limit times machine epsilon (≈ 2e-4 at 1e12) — comfortably inside
/// every index tolerance the tool reports. Callers needing tighter accuracy
/// can inspect the returned coefficient magnitudes directly.
const COEFF_LIMIT: f64 = 1e12;

/// Longest supported solve horizon (delay units); degrees grow linearly with
/// the number of intervals, so this bounds conditioning.
const MAX_T_END: f64 = 12.0;

/// Smallest supported normalized time constant; below this the exponential
/// basis `e^(−τ/t_p)` underflows within one interval.
const MIN_TIME_CONSTANT: f64 = 1e-3;

/// A constant setpoint that jumps to a new constant at `t = 0`.
///
/// The delayed setpoint seen by the loop is `before` on `[0, 1)` and `after`
/// from `t = 1` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetpointStep {
    /// Setpoint value for `t < 0`.
    pub before: f64,
    /// Setpoint value for `t ≥ 0`.
    pub after: f64,
}

impl SetpointStep {
    /// The unit-to-zero step used throughout the tuning procedures.
    pub fn unit_to_zero() -> Self {
        SetpointStep { before: 1.0, after: 0.0 }
    }

    /// A setpoint identically equal to `value` (no step).
    pub fn constant(value: f64) -> Self {
        SetpointStep { before: value, after: value }
    }

    /// The value of `r(t−1)` on the interval whose left end is `t = start`.
    pub(crate) fn delayed_value(&self, start: f64) -> f64 {
        if start < 1.0 {
            self.before
        } else {
            self.after
        }
    }
}

/// One piece of a piecewise response: `y(t) = Σ Aᵢ·τⁱ + e^(−τ/t_p)·Σ Bⱼ·τʲ`
/// with `τ = t − start`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSegment {
    /// Segment start (absolute time).
    pub start: f64,
    /// Segment end (absolute time); `end − start ≤ 1`.
    pub end: f64,
    /// Polynomial coefficients `A[i]` of `τ^i`.
    pub poly: Vec<f64>,
    /// Exponential-polynomial coefficients `B[j]` of `e^(−τ/t_p)·τ^j`.
    pub expo: Vec<f64>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of the derivative of a plain polynomial.
fn poly_deriv(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

/// Coefficients `g'` such that `d/dτ [e^(−τ/t_p)·g(τ)] = e^(−τ/t_p)·g'(τ)`.
fn expo_deriv(coeffs: &[f64], t_p: f64) -> Vec<f64> {
    if coeffs.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; coeffs.len()];
    for (j, &c) in coeffs.iter().enumerate() {
        out[j] -= c / t_p;
        if j >= 1 {
            out[j - 1] += j as f64 * c;
        }
    }
    while out.last().is_some_and(|&c| c == 0.0) {
        out.pop();
    }
    out
}

impl BasisSegment {
    /// Segment value at absolute time `t` (callers ensure coverage).
    pub fn eval(&self, t_p: f64, t: f64) -> f64 {
        let tau = t - self.start;
        horner(&self.poly, tau) + (-tau / t_p).exp() * horner(&self.expo, tau)
    }

    /// Segment first derivative at absolute time `t`.
    pub fn eval_deriv(&self, t_p: f64, t: f64) -> f64 {
        let tau = t - self.start;
        horner(&poly_deriv(&self.poly), tau)
            + (-tau / t_p).exp() * horner(&expo_deriv(&self.expo, t_p), tau)
    }

    /// Segment second derivative at absolute time `t`.
    pub fn eval_second_deriv(&self, t_p: f64, t: f64) -> f64 {
        let tau = t - self.start;
        let dp = poly_deriv(&self.poly);
        let de = expo_deriv(&self.expo, t_p);
        horner(&poly_deriv(&dp), tau) + (-tau / t_p).exp() * horner(&expo_deriv(&de, t_p), tau)
    }

    fn check_coefficients(&self) -> Result<()> {
        for &c in self.poly.iter().chain(self.expo.iter()) {
            if !c.is_finite() {
                return Err(Error::InvalidInput(
                    "segment coefficients must be finite".into(),
                ));
            }
            if c.abs() > COEFF_LIMIT {
                return Err(Error::IllConditioned { value: c, limit: COEFF_LIMIT });
            }
        }
        Ok(())
    }
}

/// A contiguous piecewise response in the polynomial + exponential basis.
///
/// Used both for solver output (covering `[0, t_end]`) and for history input
/// (covering `[−1, 0]`).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseResponse {
    /// Normalized plant time constant the basis is built on.
    pub t_p: f64,
    /// Controller gains the response was solved with (zero for histories).
    pub gains: ControllerGains,
    /// Setpoint step driving the loop.
    pub setpoint: SetpointStep,
    /// Contiguous segments ordered by time.
    pub segments: Vec<BasisSegment>,
}

impl PiecewiseResponse {
    /// Builds a response from explicit segments, validating contiguity and
    /// coefficient sanity.
    pub fn from_segments(
        t_p: f64,
        gains: ControllerGains,
        setpoint: SetpointStep,
        segments: Vec<BasisSegment>,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("a response needs at least one segment".into()));
        }
        for seg in &segments {
            if !(seg.end > seg.start) || seg.end - seg.start > 1.0 + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "segment [{}, {}] must be nonempty and at most one delay long",
                    seg.start, seg.end
                )));
            }
            seg.check_coefficients()?;
        }
        for pair in segments.windows(2) {
            if (pair[1].start - pair[0].end).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "segments must be contiguous: [{}, {}] then [{}, {}]",
                    pair[0].start, pair[0].end, pair[1].start, pair[1].end
                )));
            }
        }
        Ok(PiecewiseResponse { t_p, gains, setpoint, segments })
    }

    /// A constant history `y ≡ value` on `[−1, 0]`.
    pub fn constant_history(t_p: f64, value: f64) -> Self {
        PiecewiseResponse {
            t_p,
            gains: ControllerGains { h: 0.0, h_i: 0.0 },
            setpoint: SetpointStep::constant(value),
            segments: vec![BasisSegment {
                start: -1.0,
                end: 0.0,
                poly: vec![value],
                expo: Vec::new(),
            }],
        }
    }

    /// First covered time.
    pub fn start(&self) -> f64 {
        self.segments[0].start
    }

    /// Last covered time.
    pub fn end(&self) -> f64 {
        self.segments[self.segments.len() - 1].end
    }

    fn segment_at(&self, t: f64) -> Result<&BasisSegment> {
        if t < self.start() - 1e-12 || t > self.end() + 1e-12 {
            return Err(Error::OutOfRange { t, lo: self.start(), hi: self.end() });
        }
        // At a joint the right segment wins; the final segment is closed.
        let idx = self.segments.partition_point(|s| s.end <= t);
        Ok(&self.segments[idx.min(self.segments.len() - 1)])
    }

    /// Response value `y(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.segment_at(t)?.eval(self.t_p, t))
    }

    /// Response slope `y′(t)` (right-sided at joints).
    pub fn eval_deriv(&self, t: f64) -> Result<f64> {
        Ok(self.segment_at(t)?.eval_deriv(self.t_p, t))
    }

    /// Response curvature `y″(t)` (right-sided at joints).
    pub fn eval_second_deriv(&self, t: f64) -> Result<f64> {
        Ok(self.segment_at(t)?.eval_second_deriv(self.t_p, t))
    }

    /// Controller output `v(t) = y(t+1) + t_p·y′(t+1)`.
    ///
    /// The plant relation `t_p·y′ + y = v(t−1)` holds identically, so the
    /// output one delay earlier is read off the response and its slope.
    pub fn control_output(&self, t: f64) -> Result<f64> {
        let seg = self.segment_at(t + 1.0)?;
        Ok(seg.eval(self.t_p, t + 1.0) + self.t_p * seg.eval_deriv(self.t_p, t + 1.0))
    }
}

/// Particular solution of `t_p·a″ + a′ = P` as a polynomial with `a[0] = 0`.
fn particular_poly(p: &[f64], t_p: f64) -> Vec<f64> {
    let mut a = vec![0.0; p.len() + 1];
    for i in (0..p.len()).rev() {
        let upper = if i + 2 < a.len() { a[i + 2] } else { 0.0 };
        a[i + 1] = (p[i] - t_p * ((i + 2) * (i + 1)) as f64 * upper) / (i + 1) as f64;
    }
    a
}

/// Particular solution of `t_p·g″ − g′ = Q` (the operator acting on the
/// polynomial factor of `e^(−τ/t_p)·g`) with `g[0] = 0`.
fn particular_expo(q: &[f64], t_p: f64) -> Vec<f64> {
    let mut g = vec![0.0; q.len() + 1];
    for j in (0..q.len()).rev() {
        let upper = if j + 2 < g.len() { g[j + 2] } else { 0.0 };
        g[j + 1] = (t_p * ((j + 2) * (j + 1)) as f64 * upper - q[j]) / (j + 1) as f64;
    }
    g
}

fn trim_trailing_zeros(v: &mut Vec<f64>) {
    while v.last().is_some_and(|&c| c == 0.0) {
        v.pop();
    }
}

/// Advances the response by one delay: each previous-interval segment
/// `[s, e]` yields the forcing for the new segment `[s+1, e+1]`, and the two
/// homogeneous constants are fixed by continuity of `y` and `y′`.
fn advance_segment(
    prev: &BasisSegment,
    g: &ControllerGains,
    t_p: f64,
    r_delayed: f64,
    y_start: f64,
    yp_start: f64,
) -> Result<BasisSegment> {
    // Forcing f(τ) = h_i·(r_d − y_prev(τ)) − h·y′_prev(τ), split into the
    // plain-polynomial part P and the e^(−τ/t_p)-carried part Q.
    let prev_poly_d = poly_deriv(&prev.poly);
    let prev_expo_d = expo_deriv(&prev.expo, t_p);

    let p_len = prev.poly.len().max(prev_poly_d.len()).max(1);
    let mut p = vec![0.0; p_len];
    p[0] += g.h_i * r_delayed;
    for (i, &c) in prev.poly.iter().enumerate() {
        p[i] -= g.h_i * c;
    }
    for (i, &c) in prev_poly_d.iter().enumerate() {
        p[i] -= g.h * c;
    }
    trim_trailing_zeros(&mut p);

    let q_len = prev.expo.len().max(prev_expo_d.len());
    let mut q = vec![0.0; q_len];
    for (j, &c) in prev.expo.iter().enumerate() {
        q[j] -= g.h_i * c;
    }
    for (j, &c) in prev_expo_d.iter().enumerate() {
        q[j] -= g.h * c;
    }
    trim_trailing_zeros(&mut q);

    let mut a = particular_poly(&p, t_p);
    let mut b = particular_expo(&q, t_p);

    // Homogeneous part c0 + c1·e^(−τ/t_p) from the start conditions.
    let a1 = if a.len() > 1 { a[1] } else { 0.0 };
    let b1 = if b.len() > 1 { b[1] } else { 0.0 };
    // a[0] and b[0] are zero by construction of the particular solutions.
    let c1 = t_p * (a1 + b1 - yp_start);
    let c0 = y_start - c1;
    if a.is_empty() {
        a.push(0.0);
    }
    a[0] += c0;
    if b.is_empty() && c1 != 0.0 {
        b.push(0.0);
    }
    if !b.is_empty() {
        b[0] += c1;
    }
    trim_trailing_zeros(&mut a);
    trim_trailing_zeros(&mut b);

    let seg = BasisSegment {
        start: prev.start + 1.0,
        end: prev.end + 1.0,
        poly: a,
        expo: b,
    };
    seg.check_coefficients()?;
    Ok(seg)
}

/// Solves the closed-loop delay equation forward from the history.
///
/// `history` must cover exactly `[−1, 0]` in basis form with the same `t_p`.
/// The returned response covers `[0, ⌈t_end⌉]`; its breakpoints are the
/// history breakpoints propagated forward by whole delays.
pub fn solve(
    history: &PiecewiseResponse,
    g: ControllerGains,
    t_p: f64,
    setpoint: SetpointStep,
    t_end: f64,
) -> Result<PiecewiseResponse> {
    if !t_p.is_finite() || t_p < MIN_TIME_CONSTANT {
        return Err(Error::UnsupportedTimeConstant {
            t_p,
            reason: "the exponential basis degenerates; use the brute-force integrator",
        });
    }
    if !(t_end > 0.0) || t_end > MAX_T_END {
        return Err(Error::InvalidInput(format!(
            "solve horizon must lie in (0, {MAX_T_END}], got {t_end}"
        )));
    }
    if history.t_p != t_p {
        return Err(Error::InvalidInput(format!(
            "history basis was built for t_p = {}, solving for t_p = {}",
            history.t_p, t_p
        )));
    }
    if (history.start() + 1.0).abs() > 1e-9 || history.end().abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "history must cover [-1, 0], got [{}, {}]",
            history.start(),
            history.end()
        )));
    }

    let mut prev: Vec<BasisSegment> = history.segments.clone();
    let mut y_start = history.eval(history.end())?;
    let mut yp_start = history.eval_deriv(history.end())?;
    let mut out: Vec<BasisSegment> = Vec::new();

    while out.last().map_or(0.0, |s| s.end) < t_end - 1e-12 {
        let window_start = prev[0].start + 1.0;
        let r_delayed = setpoint.delayed_value(window_start);
        let mut next: Vec<BasisSegment> = Vec::with_capacity(prev.len());
        for seg in &prev {
            let new_seg = advance_segment(seg, &g, t_p, r_delayed, y_start, yp_start)?;
            y_start = new_seg.eval(t_p, new_seg.end);
            yp_start = new_seg.eval_deriv(t_p, new_seg.end);
            next.push(new_seg);
        }
        out.extend(next.iter().cloned());
        prev = next;
    }

    PiecewiseResponse::from_segments(t_p, g, setpoint, out)
}

/// Closed-loop response to the unit-to-zero setpoint step from the settled
/// state `y ≡ 1`: the standard scenario behind every PI chart and table row.
pub fn pi_step_response(t_p: f64, g: ControllerGains, t_end: f64) -> Result<PiecewiseResponse> {
    let history = PiecewiseResponse::constant_history(t_p, 1.0);
    solve(&history, g, t_p, SetpointStep::unit_to_zero(), t_end)
}
