//! Brute-force fixed-step integrator for the closed-loop delay equation.
//!
//! This module deliberately shares no mathematics with the exact
//! piecewise-basis solver in [`crate::steps`]: it marches the second-order
//! system with classic fourth-order Runge–Kutta on a mesh aligned to the
//! delay, reading delayed state from storage (mesh-exact at stage endpoints,
//! cubic Hermite at stage midpoints). Agreement between the two is therefore
//! meaningful evidence of correctness rather than a tautology.
//!
//! The mesh is pinned to the breakpoints: the step must divide the delay, and
//! integration proceeds one delay interval at a time so that the setpoint
//! value seen through the delay is constant within every step. Discontinuity
//! corners in the curvature (and, for the first-order path, in the slope) are
//! tracked with per-joint right-limit values so the Hermite reads stay
//! fourth-order accurate.

use crate::error::{Error, Result};
use crate::model::ControllerGains;
use crate::steps::SetpointStep;

/// Divergence threshold: once `|y|` passes this the run is reported as
/// diverged rather than being ground on until overflow.
const DIVERGENCE_LIMIT: f64 = 1e8;

/// Longest supported horizon (delay units); bounds memory, nothing else.
const MAX_HORIZON: f64 = 1000.0;

/// A closed-loop simulation problem: plant time constant, controller gains,
/// setpoint step, and the pre-step history.
///
/// `history` returns `(y, y′, y″)` at times in `[−1, 0]` and should be smooth
/// there; interior corners in the history degrade the delayed-read accuracy
/// from fourth to roughly second order near the corner images.
pub struct DdeProblem<'a> {
    /// Normalized plant time constant.
    pub t_p: f64,
    /// Controller gains.
    pub gains: ControllerGains,
    /// Setpoint step at `t = 0`.
    pub setpoint: SetpointStep,
    /// History sampler on `[−1, 0]`.
    pub history: &'a dyn Fn(f64) -> (f64, f64, f64),
}

/// Dense fixed-step output of the integrator.
///
/// Stores `(y, y′, y″)` on the mesh plus right-limit slope/curvature values
/// at the unit-interval joints so evaluation between mesh points is a
/// cell-consistent cubic Hermite read.
#[derive(Debug, Clone)]
pub struct OracleTrace {
    /// Mesh spacing.
    pub dt: f64,
    start: f64,
    n_per: usize,
    y: Vec<f64>,
    yp: Vec<f64>,
    ypp: Vec<f64>,
    joint_yp_right: Vec<f64>,
    joint_ypp_right: Vec<f64>,
}

impl OracleTrace {
    /// First covered time.
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Last covered time.
    pub fn end(&self) -> f64 {
        self.start + (self.y.len() - 1) as f64 * self.dt
    }

    fn slope_right(&self, i: usize) -> f64 {
        if i % self.n_per == 0 {
            self.joint_yp_right[i / self.n_per]
        } else {
            self.yp[i]
        }
    }

    fn curv_right(&self, i: usize) -> f64 {
        if i % self.n_per == 0 {
            self.joint_ypp_right[i / self.n_per]
        } else {
            self.ypp[i]
        }
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let pos = (t - self.start) / self.dt;
        let last = (self.y.len() - 1) as f64;
        if !(pos >= -1e-9 && pos <= last + 1e-9) {
            return Err(Error::OutOfRange { t, lo: self.start, hi: self.end() });
        }
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            let i = (nearest.max(0.0) as usize).min(self.y.len() - 1);
            return Ok((i, 0.0));
        }
        let i = pos.floor() as usize;
        Ok((i, pos - i as f64))
    }

    /// Response value `y(t)`: stored at mesh points, cubic Hermite between.
    pub fn y_at(&self, t: f64) -> Result<f64> {
        let (i, xi) = self.locate(t)?;
        if xi == 0.0 {
            return Ok(self.y[i]);
        }
        Ok(hermite(
            xi,
            self.dt,
            self.y[i],
            self.y[i + 1],
            self.slope_right(i),
            self.yp[i + 1],
        ))
    }

    /// Response slope `y′(t)` (right-limit at joints).
    pub fn deriv_at(&self, t: f64) -> Result<f64> {
        let (i, xi) = self.locate(t)?;
        if xi == 0.0 {
            return Ok(self.slope_right(i));
        }
        Ok(hermite(
            xi,
            self.dt,
            self.slope_right(i),
            self.yp[i + 1],
            self.curv_right(i),
            self.ypp[i + 1],
        ))
    }

    /// Value and slope together.
    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.y_at(t)?, self.deriv_at(t)?))
    }

    /// Largest `|y|` over the mesh points inside `[t0, t1]`.
    pub fn max_abs_y(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0 < self.start - 1e-9 || t1 > self.end() + 1e-9 || t1 < t0 {
            return Err(Error::OutOfRange { t: t0.min(t1), lo: self.start, hi: self.end() });
        }
        let lo = ((t0 - self.start) / self.dt).ceil().max(0.0) as usize;
        let hi = (((t1 - self.start) / self.dt).floor() as usize).min(self.y.len() - 1);
        Ok(self.y[lo..=hi].iter().fold(0.0_f64, |m, &v| m.max(v.abs())))
    }
}

/// Cubic Hermite interpolation on a cell of width `dt` at fraction `xi`.
fn hermite(xi: f64, dt: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    let xi2 = xi * xi;
    let xi3 = xi2 * xi;
    (2.0 * xi3 - 3.0 * xi2 + 1.0) * f0
        + (xi3 - 2.0 * xi2 + xi) * dt * d0
        + (-2.0 * xi3 + 3.0 * xi2) * f1
        + (xi3 - xi2) * dt * d1
}

/// Hermite read at the center of the cell with left index `i` (slopes passed
/// by the caller so joint right-limits can be applied).
fn hermite_mid(dt: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    0.5 * (f0 + f1) + dt * (d0 - d1) / 8.0
}

fn validate_step(dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {dt}")));
    }
    let n_per = (1.0 / dt).round();
    if n_per < 1.0 || (n_per * dt - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "step size {dt} must divide the unit delay"
        )));
    }
    Ok(n_per as usize)
}

fn validate_horizon(t_end: f64) -> Result<usize> {
    if !(t_end > 0.0) || !t_end.is_finite() || t_end > MAX_HORIZON {
        return Err(Error::InvalidInput(format!(
            "horizon must lie in (0, {MAX_HORIZON}], got {t_end}"
        )));
    }
    Ok(t_end.ceil().max(1.0) as usize)
}

/// Integrates the closed loop forward to (at least) `t_end`.
///
/// The trace covers `[−1, ⌈t_end⌉]`, history included. `t_p = 0` is accepted
/// only with `h = 0`, where the loop is first-order retarded; with `h ≠ 0`
/// the delayed-derivative term makes it neutral type, which this integrator
/// does not handle.
pub fn integrate(problem: &DdeProblem, t_end: f64, dt: f64) -> Result<OracleTrace> {
    let t_p = problem.t_p;
    let g = problem.gains;
    if !t_p.is_finite() || t_p < 0.0 {
        return Err(Error::InvalidPlant(format!(
            "time constant must be finite and nonnegative, got {t_p}"
        )));
    }
    if !g.h.is_finite() || !g.h_i.is_finite() {
        return Err(Error::InvalidGains("gains must be finite".into()));
    }
    if t_p == 0.0 && g.h != 0.0 {
        return Err(Error::UnsupportedTimeConstant {
            t_p,
            reason: "proportional action on the delayed output makes the loop neutral type",
        });
    }
    let n_per = validate_step(dt)?;
    let m_end = validate_horizon(t_end)?;
    if t_p > 0.0 && dt > 2.0 * t_p {
        return Err(Error::InvalidInput(format!(
            "step size {dt} is too coarse for time constant {t_p}; use dt <= 2*t_p"
        )));
    }

    let n_total = n_per * (m_end + 1);
    let mut y = vec![0.0; n_total + 1];
    let mut yp = vec![0.0; n_total + 1];
    let mut ypp = vec![0.0; n_total + 1];

    for i in 0..=n_per {
        let t = -1.0 + i as f64 * dt;
        let (v, d, dd) = (problem.history)(t.min(0.0));
        if !v.is_finite() || !d.is_finite() || !dd.is_finite() {
            return Err(Error::InvalidInput(format!("history is not finite at t = {t}")));
        }
        y[i] = v;
        yp[i] = d;
        ypp[i] = dd;
    }

    // Right-limit slope/curvature at unit-interval joints; defaults match the
    // stored (left-limit) values and are overwritten as each interval starts.
    let mut jr_yp = vec![0.0; m_end + 2];
    let mut jr_ypp = vec![0.0; m_end + 2];
    jr_yp[0] = yp[0];
    jr_ypp[0] = ypp[0];
    jr_yp[1] = yp[n_per];
    jr_ypp[1] = ypp[n_per];

    let mut cy = y[n_per];
    let mut cv = yp[n_per];

    for m in 0..m_end {
        let r_d = problem.setpoint.delayed_value(m as f64);
        let base = (m + 1) * n_per;
        let joint = m + 1;

        if t_p > 0.0 {
            let accel = |v: f64, yd: f64, vd: f64| {
                (g.h_i * (r_d - yd) - g.h * vd - v) / t_p
            };
            jr_yp[joint] = cv;
            jr_ypp[joint] = accel(cv, y[base - n_per], jr_yp[joint - 1]);
            for s in 0..n_per {
                let i = base + s;
                let j = i - n_per;
                let (d0y, d0v) = (y[j], if s == 0 { jr_yp[joint - 1] } else { yp[j] });
                let (d1y, d1v) = (y[j + 1], yp[j + 1]);
                let s0 = if j % n_per == 0 { jr_yp[j / n_per] } else { yp[j] };
                let c0 = if j % n_per == 0 { jr_ypp[j / n_per] } else { ypp[j] };
                let dmy = hermite_mid(dt, y[j], y[j + 1], s0, yp[j + 1]);
                let dmv = hermite_mid(dt, s0, yp[j + 1], c0, ypp[j + 1]);

                // The right-hand side does not involve y itself, so the
                // y-stage slopes are exactly the v-stage values.
                let a1 = accel(cv, d0y, d0v);
                let v2 = cv + 0.5 * dt * a1;
                let a2 = accel(v2, dmy, dmv);
                let v3 = cv + 0.5 * dt * a2;
                let a3 = accel(v3, dmy, dmv);
                let v4 = cv + dt * a3;
                let a4 = accel(v4, d1y, d1v);

                cy += dt / 6.0 * (cv + 2.0 * v2 + 2.0 * v3 + v4);
                cv += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
                if !cy.is_finite() || cy.abs() > DIVERGENCE_LIMIT {
                    return Err(Error::Diverged { t: m as f64 + (s + 1) as f64 * dt });
                }
                y[i + 1] = cy;
                yp[i + 1] = cv;
                ypp[i + 1] = accel(cv, d1y, d1v);
            }
        } else {
            // First-order retarded path (h = 0): y′(t) = h_i·(r_d − y(t−1)).
            let rate = |yd: f64| g.h_i * (r_d - yd);
            jr_yp[joint] = rate(y[base - n_per]);
            jr_ypp[joint] = -g.h_i * jr_yp[joint - 1];
            for s in 0..n_per {
                let i = base + s;
                let j = i - n_per;
                let s0 = if j % n_per == 0 { jr_yp[j / n_per] } else { yp[j] };
                let dmy = hermite_mid(dt, y[j], y[j + 1], s0, yp[j + 1]);
                let k1 = rate(y[j]);
                let k2 = rate(dmy);
                let k4 = rate(y[j + 1]);
                cy += dt / 6.0 * (k1 + 4.0 * k2 + k4);
                if !cy.is_finite() || cy.abs() > DIVERGENCE_LIMIT {
                    return Err(Error::Diverged { t: m as f64 + (s + 1) as f64 * dt });
                }
                y[i + 1] = cy;
                yp[i + 1] = rate(y[j + 1]);
                ypp[i + 1] = -g.h_i * yp[j + 1];
            }
        }
        if m + 2 < jr_yp.len() {
            jr_yp[m + 2] = yp[base + n_per];
            jr_ypp[m + 2] = ypp[base + n_per];
        }
    }

    Ok(OracleTrace {
        dt,
        start: -1.0,
        n_per,
        y,
        yp,
        ypp,
        joint_yp_right: jr_yp,
        joint_ypp_right: jr_ypp,
    })
}

/// Integrates the standard scenario: settled at `y ≡ 1`, setpoint stepping
/// from one to zero at `t = 0`.
pub fn integrate_step_scenario(
    t_p: f64,
    gains: ControllerGains,
    t_end: f64,
    dt: f64,
) -> Result<OracleTrace> {
    let history = |_: f64| (1.0, 0.0, 0.0);
    integrate(
        &DdeProblem { t_p, gains, setpoint: SetpointStep::unit_to_zero(), history: &history },
        t_end,
        dt,
    )
}

/// Integrates the predictor-compensated loop for the same scenario.
///
/// With the delay removed from the loop by the predictor, the response obeys
/// the plain second-order equation `t_p·w″ + (1+h)·w′ + h_i·w = 0` from
/// `(w, w′) = (1, 0)`, delayed one unit: `y(t) = w(t−1)`, `y ≡ 1` on `[0, 1]`.
/// The trace covers `[0, ⌈t_end⌉]`.
pub fn integrate_sp(
    t_p: f64,
    gains: ControllerGains,
    t_end: f64,
    dt: f64,
) -> Result<OracleTrace> {
    if !t_p.is_finite() || t_p <= 0.0 {
        return Err(Error::UnsupportedTimeConstant {
            t_p,
            reason: "the predictor loop equation needs a positive time constant",
        });
    }
    if !gains.h.is_finite() || !gains.h_i.is_finite() {
        return Err(Error::InvalidGains("gains must be finite".into()));
    }
    let n_per = validate_step(dt)?;
    let m_end = validate_horizon(t_end)?;
    if dt > 2.0 * t_p {
        return Err(Error::InvalidInput(format!(
            "step size {dt} is too coarse for time constant {t_p}; use dt <= 2*t_p"
        )));
    }

    let n_total = n_per * m_end;
    let mut y = vec![1.0; n_total + 1];
    let mut yp = vec![0.0; n_total + 1];
    let mut ypp = vec![0.0; n_total + 1];
    let mut jr_yp = vec![0.0; m_end + 1];
    let mut jr_ypp = vec![0.0; m_end + 1];

    let accel = |w: f64, wp: f64| -((1.0 + gains.h) * wp + gains.h_i * w) / t_p;
    let mut cw = 1.0;
    let mut cv = 0.0;
    jr_ypp[1] = accel(cw, cv);
    for i in n_per..n_total {
        let k1 = (cv, accel(cw, cv));
        let s2 = (cw + 0.5 * dt * k1.0, cv + 0.5 * dt * k1.1);
        let k2 = (s2.1, accel(s2.0, s2.1));
        let s3 = (cw + 0.5 * dt * k2.0, cv + 0.5 * dt * k2.1);
        let k3 = (s3.1, accel(s3.0, s3.1));
        let s4 = (cw + dt * k3.0, cv + dt * k3.1);
        let k4 = (s4.1, accel(s4.0, s4.1));
        cw += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        cv += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !cw.is_finite() || cw.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { t: (i + 1 - n_per) as f64 * dt + 1.0 });
        }
        y[i + 1] = cw;
        yp[i + 1] = cv;
        ypp[i + 1] = accel(cw, cv);
    }
    for m in 2..=m_end {
        jr_yp[m] = yp[m * n_per];
        jr_ypp[m] = ypp[m * n_per];
    }

    Ok(OracleTrace {
        dt,
        start: 0.0,
        n_per,
        y,
        yp,
        ypp,
        joint_yp_right: jr_yp,
        joint_ypp_right: jr_ypp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steps;

    fn gains(h: f64, h_i: f64) -> ControllerGains {
        ControllerGains::new(h, h_i).unwrap()
    }

    #[test]
    fn open_loop_decay_matches_the_exponential() {
        // With zero gains the loop reduces to t_p·y″ + y′ = 0, so a history
        // lying on e^(−t/t_p) continues along it.
        let history = |t: f64| ((-t).exp(), -(-t).exp(), (-t).exp());
        let problem = DdeProblem {
            t_p: 1.0,
            gains: gains(0.0, 0.0),
            setpoint: SetpointStep::constant(0.0),
            history: &history,
        };
        let trace = integrate(&problem, 2.0, 1e-3).unwrap();
        assert!((trace.y_at(1.0).unwrap() - (-1.0_f64).exp()).abs() < 1e-10);
        assert!((trace.y_at(0.5).unwrap() - (-0.5_f64).exp()).abs() < 1e-9);
        assert!((trace.deriv_at(1.0).unwrap() + (-1.0_f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn pure_delay_integral_loop_hits_the_hand_computed_values() {
        // t_p = 0, h = 0, h_i = 1, r ≡ 0, history y ≡ 1:
        // on [0,1] y′ = −1 so y(1) = 0; on [1,2] y′ = t − 2 so y(2) = −1/2.
        let history = |_: f64| (1.0, 0.0, 0.0);
        let problem = DdeProblem {
            t_p: 0.0,
            gains: gains(0.0, 1.0),
            setpoint: SetpointStep::constant(0.0),
            history: &history,
        };
        let trace = integrate(&problem, 3.0, 1e-3).unwrap();
        assert!(trace.y_at(1.0).unwrap().abs() < 1e-12);
        assert!((trace.y_at(2.0).unwrap() + 0.5).abs() < 1e-12);
        assert!((trace.y_at(0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cross_check_against_the_exact_solver() {
        let g = gains(1.15, 0.744);
        let exact = steps::pi_step_response(1.0, g, 7.0).unwrap();
        let trace = integrate_step_scenario(1.0, g, 7.0, 1e-3).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..=14 {
            let t = k as f64 * 0.5;
            let diff = (exact.eval(t).unwrap() - trace.y_at(t).unwrap()).abs();
            worst = worst.max(diff);
        }
        assert!(worst < 1e-6, "worst deviation {worst}");
    }

    #[test]
    fn step_halving_barely_moves_the_answer() {
        let g = gains(0.6, 0.724);
        let coarse = integrate_step_scenario(0.4, g, 7.0, 2e-3).unwrap();
        let fine = integrate_step_scenario(0.4, g, 7.0, 1e-3).unwrap();
        let diff = (coarse.y_at(7.0).unwrap() - fine.y_at(7.0).unwrap()).abs();
        assert!(diff < 1e-8, "halving moved y(7) by {diff}");
    }

    #[test]
    fn predictor_loop_matches_the_frozen_closed_form() {
        // At (h, h_i, t_p) = (1.239, 1.849, 1): a = 1.1195, b = 0.771828834652,
        // and the response bottoms out at y = −e^(−πa/b) when b·(t−1) = π.
        let trace = integrate_sp(1.0, gains(1.239, 1.849), 7.0, 1e-3).unwrap();
        assert_eq!(trace.y_at(0.5).unwrap(), 1.0);
        assert_eq!(trace.y_at(1.0).unwrap(), 1.0);
        let b = 0.771828834652;
        let t_bottom = 1.0 + std::f64::consts::PI / b;
        let y_bottom = trace.y_at(t_bottom).unwrap();
        assert!((y_bottom + 0.01049636164).abs() < 1e-9, "y at the bottom: {y_bottom}");
    }

    #[test]
    fn unstable_gains_are_reported_as_divergence() {
        let err = integrate_step_scenario(1.0, gains(0.0, 3.0), 120.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn mesh_and_stiffness_guards_fire() {
        let g = gains(0.5, 0.5);
        let err = integrate_step_scenario(1.0, g, 7.0, 0.003).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let err = integrate_step_scenario(1e-4, g, 7.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let neutral = integrate_step_scenario(0.0, g, 7.0, 1e-3).unwrap_err();
        assert!(matches!(neutral, Error::UnsupportedTimeConstant { .. }));
    }

    #[test]
    fn reads_outside_the_trace_error() {
        let trace = integrate_step_scenario(1.0, gains(0.0, 0.5), 3.0, 1e-2).unwrap();
        assert!(matches!(trace.y_at(-1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(trace.y_at(3.5), Err(Error::OutOfRange { .. })));
        assert!(trace.y_at(-1.0).is_ok());
        assert!(trace.y_at(3.0).is_ok());
    }
}
