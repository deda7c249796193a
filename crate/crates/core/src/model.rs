//! Plant and controller-gain types and the maps between physical and
//! delay-normalized (dimensionless) coordinates.
//!
//! A first-order plant with dead time,
//!
//! ```text
//! P(s) = K e^(-sL) / (1 + s T_p,phys)
//! ```
//!
//! is characterized, once time is measured in units of the dead time `L`,
//! by the single shape parameter `t_p = T_p,phys / L`. Controller gains are
//! folded with the plant gain into the dimensionless pair
//! `h = K K_p` (proportional) and `h_i = K K_i L` (integral). All analysis
//! in this crate works on `(t_p, h, h_i)`.

use crate::error::{Error, Result};

/// Physical description of a first-order plant with dead time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantModel {
    /// Steady-state gain `K` (output units per input unit). Must be nonzero.
    pub gain: f64,
    /// Time constant `T_p` in seconds. Zero models a pure-delay plant.
    pub time_constant: f64,
    /// Dead time `L` in seconds. Must be strictly positive.
    pub delay: f64,
}

impl PlantModel {
    /// Validates and builds a plant description.
    ///
    /// Requires `delay > 0`, `gain != 0` and `time_constant >= 0`, all
    /// finite.
    pub fn new(gain: f64, time_constant: f64, delay: f64) -> Result<Self> {
        if !gain.is_finite() || gain == 0.0 {
            return Err(Error::InvalidPlant(format!(
                "gain must be finite and nonzero, got {gain}"
            )));
        }
        if !time_constant.is_finite() || time_constant < 0.0 {
            return Err(Error::InvalidPlant(format!(
                "time constant must be finite and >= 0, got {time_constant}"
            )));
        }
        if !delay.is_finite() || delay <= 0.0 {
            return Err(Error::InvalidPlant(format!(
                "dead time must be finite and > 0, got {delay}"
            )));
        }
        Ok(Self { gain, time_constant, delay })
    }

    /// Reduces the plant to its delay-normalized shape parameter.
    pub fn normalize(&self) -> NormalizedPlant {
        NormalizedPlant { t_p: self.time_constant / self.delay }
    }
}

/// Delay-normalized plant: everything about the loop's shape is captured by
/// `t_p = T_p / L` once time is counted in units of `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPlant {
    /// Normalized time constant. `t_p = 0` models a pure-delay plant; it is
    /// a degenerate but useful limit that some routines reject explicitly.
    pub t_p: f64,
}

impl NormalizedPlant {
    /// Builds a normalized plant directly from `t_p >= 0`.
    pub fn new(t_p: f64) -> Result<Self> {
        if !t_p.is_finite() || t_p < 0.0 {
            return Err(Error::InvalidPlant(format!(
                "normalized time constant must be finite and >= 0, got {t_p}"
            )));
        }
        Ok(Self { t_p })
    }
}

/// Reduces a physical plant to its normalized form. Equivalent to
/// [`PlantModel::normalize`].
pub fn normalize_plant(plant: &PlantModel) -> NormalizedPlant {
    plant.normalize()
}

/// Dimensionless controller gains `h = K K_p`, `h_i = K K_i L`.
///
/// `h >= 0` and `h_i >= 0` always; tuned points additionally have
/// `h_i > 0`, and the two-mode controller's closed-loop mode uses `h = 0`
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    /// Dimensionless proportional gain.
    pub h: f64,
    /// Dimensionless integral gain.
    pub h_i: f64,
}

impl ControllerGains {
    /// Validates and builds a gain pair (`h >= 0`, `h_i >= 0`, finite).
    pub fn new(h: f64, h_i: f64) -> Result<Self> {
        if !h.is_finite() || h < 0.0 {
            return Err(Error::InvalidGains(format!(
                "proportional gain h must be finite and >= 0, got {h}"
            )));
        }
        if !h_i.is_finite() || h_i < 0.0 {
            return Err(Error::InvalidGains(format!(
                "integral gain h_i must be finite and >= 0, got {h_i}"
            )));
        }
        Ok(Self { h, h_i })
    }

    /// Pure-integral gains (`h = 0`), as used by the two-mode controller's
    /// closed-loop mode.
    pub fn integral_only(h_i: f64) -> Result<Self> {
        Self::new(0.0, h_i)
    }

    /// Converts to physical PI gains for a given plant.
    pub fn to_physical(&self, plant: &PlantModel) -> PhysicalGains {
        PhysicalGains {
            k_p: self.h / plant.gain,
            k_i: self.h_i / (plant.gain * plant.delay),
        }
    }

    /// Recovers dimensionless gains from physical PI gains on a given plant.
    pub fn from_physical(physical: &PhysicalGains, plant: &PlantModel) -> Result<Self> {
        Self::new(
            physical.k_p * plant.gain,
            physical.k_i * plant.gain * plant.delay,
        )
    }
}

/// Physical PI gains: `u(t) = K_p e(t) + K_i integral e dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalGains {
    /// Proportional gain in controller units.
    pub k_p: f64,
    /// Integral gain in controller units per second.
    pub k_i: f64,
}

/// Converts dimensionless gains to physical gains for a plant. Equivalent to
/// [`ControllerGains::to_physical`].
pub fn gains_to_physical(gains: &ControllerGains, plant: &PlantModel) -> PhysicalGains {
    gains.to_physical(plant)
}

/// Step-response quality indices for a unit setpoint step.
///
/// Overshoots are reported as magnitudes of the worst excursion past the new
/// setpoint (zero when the response never crosses it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceIndices {
    /// Overshoot of the controlled variable.
    pub po_y: f64,
    /// Overshoot (worst reverse excursion) of the control output.
    pub po_v: f64,
    /// Two-mode controller only: largest `|y|` after the hand-over to the
    /// integral mode, which must stay at the band width for a quiet
    /// hand-over.
    pub po_b: Option<f64>,
    /// Integral of the squared error over the evaluation horizon.
    pub ise: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_divides_time_constant_by_delay() {
        let plant = PlantModel::new(2.0, 11.0, 20.0).unwrap();
        assert!((plant.normalize().t_p - 0.55).abs() < 1e-15);

        let plant = PlantModel::new(0.5, 3.0, 3.0).unwrap();
        assert!((plant.normalize().t_p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_delay_is_rejected() {
        assert!(PlantModel::new(1.0, 1.0, 0.0).is_err());
        assert!(PlantModel::new(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn zero_gain_is_rejected() {
        assert!(PlantModel::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn pure_delay_plant_is_accepted() {
        let plant = PlantModel::new(1.0, 0.0, 5.0).unwrap();
        assert_eq!(plant.normalize().t_p, 0.0);
    }

    #[test]
    fn gains_to_physical_divides_out_plant_gain_and_delay() {
        let plant = PlantModel::new(2.0, 11.0, 20.0).unwrap();
        let g = ControllerGains::new(0.70, 0.737).unwrap();
        let p = g.to_physical(&plant);
        assert!((p.k_p - 0.35).abs() < 1e-15);
        assert!((p.k_i - 0.737 / 40.0).abs() < 1e-15);

        // Unit plant: physical and dimensionless coincide.
        let unit = PlantModel::new(1.0, 1.0, 1.0).unwrap();
        let g = ControllerGains::new(1.15, 0.744).unwrap();
        let p = g.to_physical(&unit);
        assert!((p.k_p - 1.15).abs() < 1e-15);
        assert!((p.k_i - 0.744).abs() < 1e-15);
    }

    #[test]
    fn negative_gains_are_rejected() {
        assert!(ControllerGains::new(-0.1, 0.5).is_err());
        assert!(ControllerGains::new(0.1, -0.5).is_err());
        assert!(ControllerGains::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn physical_round_trip_is_exact_to_roundoff() {
        let plant = PlantModel::new(3.7, 42.0, 6.5).unwrap();
        let g = ControllerGains::new(1.23, 0.456).unwrap();
        let back = ControllerGains::from_physical(&g.to_physical(&plant), &plant).unwrap();
        assert!((back.h - g.h).abs() <= 1e-12 * g.h.abs());
        assert!((back.h_i - g.h_i).abs() <= 1e-12 * g.h_i.abs());
    }
}
