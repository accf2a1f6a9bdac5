//! Gaussian simulation of continuous-variable entanglement swapping with
//! bright beams.
//!
//! * [`gaussian`]: carriers and covariances of bright multimode beams under
//!   linear optics.
//! * [`detection`]: direct-detection photocurrents, electronic mixing,
//!   feedforward and shot-noise-referenced noise powers.
//! * [`criteria`]: two-mode inseparability sums, PPT symplectic spectra and
//!   multipartite combination tests.
//! * [`scenarios`]: the swapping experiment, its trace presets and the
//!   classical-teleportation baseline.
//! * [`oracle`]: Monte Carlo cross-checks of the analytic noise powers.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix double precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod detection;
pub mod error;
pub mod gaussian;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod scenarios;
pub mod symplectic;

pub use error::{Error, Result};
pub use gaussian::Quadrature;
pub use scalar::Real;

pub type BrightState64 = gaussian::BrightState<f64>;
pub type BrightState32 = gaussian::BrightState<f32>;
pub type SqueezerParams64 = gaussian::SqueezerParams<f64>;
pub type Signal64 = detection::Signal<f64>;
pub type NoiseReport64 = detection::NoiseReport<f64>;
pub type CriterionResult64 = criteria::CriterionResult<f64>;
pub type SwapSetup64 = scenarios::SwapSetup<f64>;
pub type TraceSet64 = scenarios::TraceSet<f64>;
