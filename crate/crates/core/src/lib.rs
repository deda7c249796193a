//! Analysis and tuning toolkit for single-loop control of first-order plants
//! with dead time.
//!
//! Everything works in delay-normalized coordinates: the plant
//! `K e^(-sL) / (1 + s T_p)` is reduced to the single shape parameter
//! `t_p = T_p / L`, and controller gains are folded with the plant gain into
//! the dimensionless pair `h = K K_p`, `h_i = K K_i L`. Time is measured in
//! units of the dead time `L`.
//!
//! The crate covers three controller structures:
//!
//! * a PI controller acting directly on the delayed plant,
//! * a Smith predictor wrapped around the same PI law, and
//! * a two-mode controller that applies an open-loop proportional move on a
//!   setpoint change and hands over to a pure integral loop once the error
//!   enters a small band.
//!
//! Modules:
//!
//! * [`model`] — plant and gain types plus the physical/dimensionless maps.
//! * [`stability`] — gain and integral-gain stability bounds, phase margins.
//! * [`steps`] — exact piecewise responses of the closed-loop delay equation
//!   by the method of steps.
//! * [`smith`] — closed-form Smith-predictor responses and indices.
//! * [`proposed`] — the two-mode controller's responses and indices.
//! * [`indices`] — sampled overshoot and integral-squared-error reductions.
//! * [`oracle`] — brute-force Runge–Kutta integration used to verify the
//!   exact solvers; never part of a production path.
//! * [`tuning`] — chart curve tracing, the three tuning procedures, and the
//!   bundled benchmark table.
//! * [`runtime`] — a discrete-time implementation of the two-mode controller
//!   with gain adaptation.
//! * [`cli`] — the `delayloop` command-line front end.

pub mod cli;
pub mod error;
pub mod indices;
pub mod model;
pub mod oracle;
pub mod proposed;
mod roots;
pub mod runtime;
pub mod smith;
pub mod stability;
pub mod steps;
pub mod tuning;

pub use error::{Error, Result};
pub use model::{ControllerGains, NormalizedPlant, PerformanceIndices, PhysicalGains, PlantModel};
