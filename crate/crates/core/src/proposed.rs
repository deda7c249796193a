//! Exact analysis of the two-mode variable-structure controller.
//!
//! For the unit-to-zero setpoint step from the settled state the controller
//! runs open loop first: the output drops to the new steady value (zero)
//! immediately, so the response holds at one for one delay and then decays
//! along the open-loop plant exponential. Once the response reaches the
//! switching band `b_s` — which the decay does after `t_q = t_p·ln(1/b_s)` —
//! the second mode takes over with pure integral action `h_i`, driving the
//! remaining error to zero in closed loop.
//!
//! Mode one is known in closed form; mode two is the same delay equation the
//! exact piecewise solver handles, with the tail of the decay as its
//! history. Both pieces are exact, so the composite response is exact.
//!
//! Index conventions: the integral squared error is taken over the absolute
//! horizon `[0, t_s]`, while the overshoot/steadiness indices (`po_y`,
//! `po_v`, `po_b`) are sampled over the second-mode window — the part of the
//! response the integral gain actually shapes. For slow plants the second
//! mode begins after the index horizon, which would otherwise leave the
//! integral gain invisible to the tuning procedure.

use crate::error::{Error, Result};
use crate::indices::{ise_trapezoid, overshoot, SampledTrace};
use crate::model::{ControllerGains, PerformanceIndices};
use crate::steps::{solve, BasisSegment, PiecewiseResponse, SetpointStep};

/// Longest supported index horizon (delay units): the exact solver behind
/// mode two is capped one delay beyond it.
const MAX_HORIZON: f64 = 11.0;

fn check_band(b_s: f64) -> Result<()> {
    if !(b_s > 0.0 && b_s < 1.0) {
        return Err(Error::InvalidInput(format!(
            "the switching band must lie strictly between 0 and 1, got {b_s}"
        )));
    }
    Ok(())
}

fn check_time_constant(t_p: f64) -> Result<()> {
    if !t_p.is_finite() || t_p < 1e-3 {
        return Err(Error::UnsupportedTimeConstant {
            t_p,
            reason: "the two-mode analysis needs t_p >= 1e-3",
        });
    }
    Ok(())
}

fn check_integral_gain(h_i: f64) -> Result<()> {
    if !h_i.is_finite() || h_i <= 0.0 {
        return Err(Error::InvalidGains(format!(
            "the second mode needs a positive integral gain, got {h_i}"
        )));
    }
    Ok(())
}

fn check_horizon(t_s: f64) -> Result<()> {
    if !t_s.is_finite() || !(t_s > 0.0) || t_s > MAX_HORIZON {
        return Err(Error::InvalidInput(format!(
            "the index horizon must lie in (0, {MAX_HORIZON}], got {t_s}"
        )));
    }
    Ok(())
}

/// The open-loop first mode: flat for one delay, then the plant exponential
/// down to the switching band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstMode {
    /// Normalized plant time constant.
    pub t_p: f64,
    /// Switching band.
    pub b_s: f64,
    /// Decay duration until the band is reached: `t_p·ln(1/b_s)`.
    pub t_q: f64,
}

/// Builds the first mode for a plant and band.
pub fn first_mode(t_p: f64, b_s: f64) -> Result<FirstMode> {
    check_time_constant(t_p)?;
    check_band(b_s)?;
    Ok(FirstMode { t_p, b_s, t_q: -t_p * b_s.ln() })
}

impl FirstMode {
    /// Absolute time at which the second mode takes over.
    pub fn switch_time(&self) -> f64 {
        1.0 + self.t_q
    }

    /// Response value on `[0, 1 + t_q]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 || t > self.switch_time() + 1e-12 {
            return Err(Error::OutOfRange { t, lo: 0.0, hi: self.switch_time() });
        }
        if t <= 1.0 {
            return Ok(1.0);
        }
        Ok(((1.0 - t) / self.t_p).exp())
    }
}

/// The one-delay tail of the first mode, rebased so the second mode starts
/// at time zero: the history the second-mode delay equation evolves from.
pub fn second_mode_history(t_p: f64, b_s: f64) -> Result<PiecewiseResponse> {
    let mode = first_mode(t_p, b_s)?;
    let t_q = mode.t_q;
    let segments = if t_q < 1.0 {
        // The tail still contains the settled part: flat until the output
        // drop reaches the plant, exponential afterwards.
        vec![
            BasisSegment { start: -1.0, end: -t_q, poly: vec![1.0], expo: Vec::new() },
            BasisSegment { start: -t_q, end: 0.0, poly: Vec::new(), expo: vec![1.0] },
        ]
    } else {
        // Entirely on the exponential: local value e^((1−t_q)/t_p)·e^(−τ/t_p).
        vec![BasisSegment {
            start: -1.0,
            end: 0.0,
            poly: Vec::new(),
            expo: vec![((1.0 - t_q) / t_p).exp()],
        }]
    };
    PiecewiseResponse::from_segments(
        t_p,
        ControllerGains { h: 0.0, h_i: 0.0 },
        SetpointStep::constant(0.0),
        segments,
    )
}

/// Solves the second mode (pure integral action on the band-sized residual)
/// in second-mode local time `[0, t_end]`.
pub fn second_mode_solve(
    t_p: f64,
    h_i: f64,
    b_s: f64,
    t_end: f64,
) -> Result<PiecewiseResponse> {
    check_integral_gain(h_i)?;
    let history = second_mode_history(t_p, b_s)?;
    let gains = ControllerGains::new(0.0, h_i)?;
    solve(&history, gains, t_p, SetpointStep::constant(0.0), t_end)
}

/// The exact composite response of the two-mode controller in absolute time.
#[derive(Debug, Clone)]
pub struct ProposedResponse {
    /// Normalized plant time constant.
    pub t_p: f64,
    /// Second-mode integral gain.
    pub h_i: f64,
    /// Switching band.
    pub b_s: f64,
    /// First-mode decay duration.
    pub t_q: f64,
    second: PiecewiseResponse,
}

/// Builds the composite response with enough coverage for all indices over
/// `[0, t_s]`.
pub fn proposed_response(t_p: f64, h_i: f64, b_s: f64, t_s: f64) -> Result<ProposedResponse> {
    check_horizon(t_s)?;
    let mode = first_mode(t_p, b_s)?;
    let second = second_mode_solve(t_p, h_i, b_s, t_s + 1.0)?;
    Ok(ProposedResponse { t_p, h_i, b_s, t_q: mode.t_q, second })
}

impl ProposedResponse {
    /// Absolute time at which the second-mode response begins.
    pub fn switch_time(&self) -> f64 {
        1.0 + self.t_q
    }

    /// The second-mode response in its local time frame.
    pub fn second_mode(&self) -> &PiecewiseResponse {
        &self.second
    }

    /// Response value `y(t)` in absolute time.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.switch_time() + self.second.end(),
            });
        }
        if t <= 1.0 {
            return Ok(1.0);
        }
        if t <= self.switch_time() {
            return Ok(((1.0 - t) / self.t_p).exp());
        }
        self.second.eval(t - self.switch_time())
    }

    /// Controller output `v(t)` in absolute time: exactly zero while the
    /// first mode coasts (the output was dropped to the new setpoint at
    /// `t = 0`), then the second-mode integral action.
    pub fn control_output(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.second.end() + self.t_q,
            });
        }
        if t <= self.t_q {
            return Ok(0.0);
        }
        let x = t - self.t_q;
        Ok(self.second.eval(x)? + self.t_p * self.second.eval_deriv(x)?)
    }

    /// Second-mode-window output samples use local time `x`: the output that
    /// produces the second-mode response at `x + 1`.
    fn window_output(&self, x: f64) -> Result<f64> {
        Ok(self.second.eval(x + 1.0)? + self.t_p * self.second.eval_deriv(x + 1.0)?)
    }

    /// Overshoot/steadiness triple `(po_y, po_v, po_b)` sampled over the
    /// second-mode window `[0, t_s]` (local time).
    pub fn overshoots(&self, t_s: f64) -> Result<(f64, f64, f64)> {
        check_horizon(t_s)?;
        let n = SampledTrace::standard_count(t_s);
        let y = SampledTrace::sample(|x| self.second.eval(x), t_s, n)?;
        let v = SampledTrace::sample(|x| self.window_output(x), t_s, n)?;
        Ok((overshoot(&y.y), overshoot(&v.y), steadiness_index(&y.y)))
    }

    /// Integral squared error over the absolute horizon `[0, t_s]`: the flat
    /// and decay parts in closed form, the second-mode part by trapezoid.
    pub fn ise(&self, t_s: f64) -> Result<f64> {
        check_horizon(t_s)?;
        if t_s <= 1.0 {
            return Ok(t_s);
        }
        if self.t_q >= t_s - 1.0 {
            return Ok(decay_only_ise(self.t_p, t_s));
        }
        let len = t_s - 1.0 - self.t_q;
        let n = ((len / 0.01).round() as usize + 1).max(2);
        let tail = SampledTrace::sample(|x| self.second.eval(x), len, n)?;
        let decay = (self.t_p / 2.0) * (1.0 - (-2.0 * self.t_q / self.t_p).exp());
        Ok(1.0 + decay + ise_trapezoid(&tail.y, tail.dt))
    }

    /// All indices: overshoots over the second-mode window, integral squared
    /// error over the absolute horizon.
    pub fn indices(&self, t_s: f64) -> Result<PerformanceIndices> {
        let (po_y, po_v, po_b) = self.overshoots(t_s)?;
        Ok(PerformanceIndices { po_y, po_v, po_b: Some(po_b), ise: self.ise(t_s)? })
    }
}

/// Integral squared error when the decay alone fills the horizon — it no
/// longer depends on the integral gain at all.
fn decay_only_ise(t_p: f64, t_s: f64) -> f64 {
    1.0 + (t_p / 2.0) * (1.0 - (-2.0 * (t_s - 1.0) / t_p).exp())
}

/// Largest band excursion of the second-mode samples: the steadiness index
/// `po_b`. The window starts exactly at the band edge, so a well-tuned gain
/// keeps this at `b_s` and any violation shows up as an excess over it.
pub fn steadiness_index(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
}

/// Overshoot/steadiness triple for a fresh response.
pub fn proposed_overshoots(
    t_p: f64,
    h_i: f64,
    b_s: f64,
    t_s: f64,
) -> Result<(f64, f64, f64)> {
    proposed_response(t_p, h_i, b_s, t_s)?.overshoots(t_s)
}

/// Integral squared error for a fresh response; uses the closed form alone
/// when the second mode starts beyond the horizon.
pub fn proposed_ise(t_p: f64, h_i: f64, b_s: f64, t_s: f64) -> Result<f64> {
    check_horizon(t_s)?;
    check_integral_gain(h_i)?;
    let mode = first_mode(t_p, b_s)?;
    if t_s <= 1.0 {
        return Ok(t_s);
    }
    if mode.t_q >= t_s - 1.0 {
        return Ok(decay_only_ise(t_p, t_s));
    }
    proposed_response(t_p, h_i, b_s, t_s)?.ise(t_s)
}

/// All indices for a fresh response.
pub fn proposed_indices(
    t_p: f64,
    h_i: f64,
    b_s: f64,
    t_s: f64,
) -> Result<PerformanceIndices> {
    proposed_response(t_p, h_i, b_s, t_s)?.indices(t_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{integrate, DdeProblem};

    const B_S: f64 = 0.02;

    #[test]
    fn first_mode_reaches_the_band_at_the_switch() {
        let mode = first_mode(1.0, B_S).unwrap();
        assert!((mode.t_q - 50.0_f64.ln()).abs() < 1e-15);
        assert_eq!(mode.eval(0.5).unwrap(), 1.0);
        assert_eq!(mode.eval(1.0).unwrap(), 1.0);
        assert!((mode.eval(mode.switch_time()).unwrap() - B_S).abs() < 1e-15);
        assert!(mode.eval(mode.switch_time() + 1.0).is_err());
    }

    #[test]
    fn fast_plants_keep_the_settled_corner_inside_the_history() {
        // t_q < 1: the rebased history must split at the corner where the
        // decay begins, and the joint continuity must carry b_s exactly.
        let t_p = 0.1;
        let history = second_mode_history(t_p, B_S).unwrap();
        assert_eq!(history.segments.len(), 2);
        let second = second_mode_solve(t_p, 0.017, B_S, 7.0).unwrap();
        assert!((second.eval(0.0).unwrap() - B_S).abs() < 1e-12);
        assert!((second.eval_deriv(0.0).unwrap() + B_S / t_p).abs() < 1e-9);
        // Breakpoints inherited from the corner: two segments per window.
        assert!(second.segments.len() >= 12);
    }

    #[test]
    fn slow_plants_enter_the_second_mode_on_a_pure_exponential() {
        let t_p = 1.0;
        let history = second_mode_history(t_p, B_S).unwrap();
        assert_eq!(history.segments.len(), 1);
        let second = second_mode_solve(t_p, 0.272, B_S, 8.0).unwrap();
        assert!((second.eval(0.0).unwrap() - B_S).abs() < 1e-12);
        assert!((second.eval_deriv(0.0).unwrap() + B_S / t_p).abs() < 1e-12);
    }

    #[test]
    fn second_mode_agrees_with_the_brute_force_integrator() {
        let (t_p, h_i) = (1.0, 0.272);
        let history = second_mode_history(t_p, B_S).unwrap();
        let closure = |t: f64| {
            (
                history.eval(t).unwrap(),
                history.eval_deriv(t).unwrap(),
                history.eval_second_deriv(t).unwrap(),
            )
        };
        let problem = DdeProblem {
            t_p,
            gains: ControllerGains::new(0.0, h_i).unwrap(),
            setpoint: SetpointStep::constant(0.0),
            history: &closure,
        };
        let trace = integrate(&problem, 6.0, 1e-3).unwrap();
        let second = second_mode_solve(t_p, h_i, B_S, 6.0).unwrap();
        for x in [0.5, 2.0, 5.0] {
            let exact = second.eval(x).unwrap();
            let brute = trace.y_at(x).unwrap();
            assert!((exact - brute).abs() < 1e-6, "x = {x}: {exact} vs {brute}");
        }
    }

    #[test]
    fn composite_response_is_continuous_and_output_coasts_at_zero() {
        let resp = proposed_response(1.0, 0.272, B_S, 7.0).unwrap();
        let t0 = resp.switch_time();
        assert!((resp.eval(t0 - 1e-9).unwrap() - resp.eval(t0 + 1e-9).unwrap()).abs() < 1e-8);
        assert_eq!(resp.control_output(0.0).unwrap(), 0.0);
        assert_eq!(resp.control_output(resp.t_q * 0.5).unwrap(), 0.0);
        assert_eq!(resp.control_output(resp.t_q).unwrap(), 0.0);
        assert!(resp.control_output(resp.t_q + 0.1).unwrap() != 0.0);
    }

    #[test]
    fn slow_plant_ise_uses_the_gain_free_closed_form() {
        // t_p = 10 and t_p = 4 rows: the decay alone fills the horizon.
        let ise10 = proposed_ise(10.0, 0.711, B_S, 7.0).unwrap();
        let expected10 = 1.0 + 5.0 * (1.0 - (-1.2_f64).exp());
        assert!((ise10 - expected10).abs() < 1e-12);
        assert!((ise10 - 4.494).abs() < 5e-4);
        let ise4 = proposed_ise(4.0, 0.333, B_S, 7.0).unwrap();
        assert!((ise4 - 2.900).abs() < 5e-4);
        // Gain-independence of the branch.
        let other = proposed_ise(10.0, 0.2, B_S, 7.0).unwrap();
        assert_eq!(ise10, other);
    }

    #[test]
    fn branch_split_agrees_with_direct_sampling_of_the_composite() {
        let (t_p, h_i) = (1.0, 0.272);
        let resp = proposed_response(t_p, h_i, B_S, 7.0).unwrap();
        let branch = resp.ise(7.0).unwrap();
        let n = SampledTrace::standard_count(7.0);
        let direct = SampledTrace::sample(|t| resp.eval(t), 7.0, n).unwrap();
        let direct_ise = ise_trapezoid(&direct.y, direct.dt);
        assert!((branch - direct_ise).abs() < 5e-4, "{branch} vs {direct_ise}");
    }

    #[test]
    fn index_anchors_at_the_tuned_row() {
        let (po_y, po_v, po_b) = proposed_overshoots(1.0, 0.272, B_S, 7.0).unwrap();
        assert!((po_y - 0.0105).abs() < 5e-4, "po_y = {po_y}");
        assert!(po_v > 0.0 && po_v < 0.10, "po_v = {po_v}");
        assert!((po_b - B_S).abs() < 1e-6, "po_b = {po_b}");
        let ise = proposed_ise(1.0, 0.272, B_S, 7.0).unwrap();
        assert!((ise - 1.500).abs() < 5e-3, "ise = {ise}");
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            first_mode(1.0, 1.5),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            first_mode(1e-4, B_S),
            Err(Error::UnsupportedTimeConstant { .. })
        ));
        assert!(matches!(
            proposed_ise(1.0, 0.0, B_S, 7.0),
            Err(Error::InvalidGains(_))
        ));
        assert!(matches!(
            proposed_indices(1.0, 0.272, B_S, 11.5),
            Err(Error::InvalidInput(_))
        ));
    }
}
