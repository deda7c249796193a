//! Stability region and phase-margin computations for the delayed loop.
//!
//! The characteristic quantities live in the normalized frequency variable
//! `z = ω·L`. For the PI structure (and the proposed controller with `h = 0`)
//! the closed loop is stable exactly when `0 < h_i < h_i_max(h, t_p)` with
//! `h < h_u(t_p)`; the boundary data is produced by [`hi_stability_bounds`].
//! The Smith predictor needs only the sign test [`sp_is_stable`].

use crate::error::{Error, Result};
use crate::model::ControllerGains;
use crate::roots::{bisect, scan_roots, BISECT_TOL, SCAN_STEP};
use std::f64::consts::{FRAC_PI_2, PI};

/// Stability boundary data for one `(h, t_p)` pair.
///
/// `z1 < z2` are the first two positive roots of `h + cos z − t_p·z·sin z = 0`;
/// the stable integral-gain set is exactly `(0, h_i_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBounds {
    /// First root of the crossover equation in `(π/2, π]`.
    pub z_a: f64,
    /// Ultimate proportional gain: no `h_i` stabilizes at or above it.
    pub h_u: f64,
    /// First positive root of the root equation.
    pub z1: f64,
    /// Second positive root of the root equation.
    pub z2: f64,
    /// Supremum of stabilizing integral gains.
    pub h_i_max: f64,
}

/// Gain-crossover frequency and phase margin of the open loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginResult {
    /// Gain-crossover frequency (radians per delay unit).
    pub z_b: f64,
    /// Phase margin in radians, reduced to `(−π, π]`.
    pub pm: f64,
}

fn check_time_constant(t_p: f64) -> Result<()> {
    if !t_p.is_finite() || t_p < 0.0 {
        return Err(Error::InvalidPlant(format!(
            "normalized time constant must be finite and nonnegative, got {t_p}"
        )));
    }
    Ok(())
}

/// Crossover frequency `z_a` and ultimate proportional gain `h_u`.
///
/// `z_a` is the first positive solution of `tan z = −t_p·z/(1 + t_p)`,
/// bracketed in `(π/2, π]`, and `h_u = −cos z_a + t_p·z_a·sin z_a`.
pub fn ultimate_gain(t_p: f64) -> Result<(f64, f64)> {
    check_time_constant(t_p)?;
    if t_p == 0.0 {
        return Ok((PI, 1.0));
    }
    // Singularity-free form of the tan equation.
    let f = |z: f64| (1.0 + t_p) * z.sin() + t_p * z * z.cos();
    let z_a = bisect(f, FRAC_PI_2, PI, BISECT_TOL);
    Ok((z_a, -z_a.cos() + t_p * z_a * z_a.sin()))
}

/// Supremum of proportional gains for which a stabilizing `h_i > 0` exists.
///
/// Strictly below the ultimate gain for every `t_p > 0`: between the two the
/// loop can be stabilized by proportional action alone but any integral
/// action destabilizes it (`h_i_max` reaches zero at this value). Equals the
/// proportional-only ultimate gain, the root of `sin z + t_p·z·cos z = 0`
/// substituted into `−cos z + t_p·z·sin z`.
pub fn stabilizable_h_sup(t_p: f64) -> Result<f64> {
    check_time_constant(t_p)?;
    if t_p == 0.0 {
        return Ok(1.0);
    }
    let g = |z: f64| z.sin() + t_p * z * z.cos();
    let z = bisect(g, FRAC_PI_2, PI, BISECT_TOL);
    Ok(-z.cos() + t_p * z * z.sin())
}

/// Stable integral-gain interval data for a proportional gain `h`.
///
/// Solves `q(z) = h + cos z − t_p·z·sin z = 0` for its first two positive
/// roots and evaluates `h_i_max = z1·sin z1 + t_p·z1²·cos z1`. Errors with
/// [`Error::NoStableIntegralGain`] when `h ≥ h_u` or when the resulting
/// `h_i_max` is not positive (which happens on `[h_sup, h_u)`, see
/// [`stabilizable_h_sup`]).
pub fn hi_stability_bounds(h: f64, t_p: f64) -> Result<StabilityBounds> {
    check_time_constant(t_p)?;
    if !h.is_finite() || h < 0.0 {
        return Err(Error::InvalidGains(format!(
            "proportional gain must be finite and nonnegative, got {h}"
        )));
    }
    let (z_a, h_u) = ultimate_gain(t_p)?;
    if h >= h_u {
        return Err(Error::NoStableIntegralGain { h, t_p });
    }

    let (z1, z2) = if t_p == 0.0 {
        // q(z) = h + cos z: closed-form roots.
        let z1 = (-h).acos();
        (z1, 2.0 * PI - z1)
    } else {
        let q = |z: f64| h + z.cos() - t_p * z * z.sin();
        // Scan for sign changes, then refine by bisection.
        let upper = 1.5 * PI;
        let roots = scan_roots(q, 1e-6, upper, SCAN_STEP, 2);
        if roots.len() == 2 {
            (roots[0], roots[1])
        } else {
            // Near h_u the two roots approach z_a from either side and the
            // scan step can straddle both. q decreases on (0, z_a) and
            // increases on (z_a, 3π/2) with q(z_a) = h − h_u < 0, so z_a
            // splits the bracket exactly.
            (
                bisect(q, 1e-9, z_a, BISECT_TOL),
                bisect(q, z_a, upper, BISECT_TOL),
            )
        }
    };

    let h_i_max = z1 * z1.sin() + t_p * z1 * z1 * z1.cos();
    // The second root must yield a nonpositive lower bound so the stable set
    // is exactly (0, h_i_max); this holds structurally for z2 ∈ (z_a, 3π/2).
    let lower = z2 * z2.sin() + t_p * z2 * z2 * z2.cos();
    debug_assert!(lower <= 1e-9, "z2 condition produced a positive lower bound");
    if h_i_max <= 0.0 {
        return Err(Error::NoStableIntegralGain { h, t_p });
    }
    Ok(StabilityBounds { z_a, h_u, z1, z2, h_i_max })
}

/// Gain-crossover frequency and phase margin of the open loop `C(s)·P(s)·e^(−s)`.
///
/// `z_b` solves `h² + h_i²/z² = 1 + t_p²·z²` in closed form. The margin is
/// the distance of the open-loop phase at crossover from `−π`, computed with
/// a quadrant-aware arctangent and reduced to `(−π, π]`.
pub fn phase_margin(g: &ControllerGains, t_p: f64) -> Result<MarginResult> {
    check_time_constant(t_p)?;
    if g.h_i <= 0.0 {
        return Err(Error::InvalidGains(format!(
            "phase margin needs a positive integral gain for a defined crossover, got h_i = {}",
            g.h_i
        )));
    }
    let (h, h_i) = (g.h, g.h_i);
    // t_p²·z⁴ + (1 − h²)·z² − h_i² = 0, solved for z² > 0.
    let c = 1.0 - h * h;
    let z2 = if t_p == 0.0 {
        if h >= 1.0 {
            return Err(Error::InvalidGains(format!(
                "no gain crossover exists for h = {h} ≥ 1 with a pure-delay plant"
            )));
        }
        h_i * h_i / c
    } else {
        let tp2 = t_p * t_p;
        (-c + (c * c + 4.0 * tp2 * h_i * h_i).sqrt()) / (2.0 * tp2)
    };
    let z_b = z2.sqrt();
    // Open-loop phase at z_b: controller + plant lag + dead time.
    let phase = (-h_i / z_b).atan2(h) - (z_b * t_p).atan() - z_b;
    let mut pm = PI + phase;
    // Reduce to (−π, π].
    pm = (pm + PI).rem_euclid(2.0 * PI) - PI;
    if pm == -PI {
        pm = PI;
    }
    Ok(MarginResult { z_b, pm })
}

/// Smith-predictor stability test for the matched model: stable iff `1 + h > 0`.
pub fn sp_is_stable(h: f64) -> bool {
    1.0 + h > 0.0
}
