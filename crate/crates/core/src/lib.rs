//! Phase estimation with binary-outcome measurements in a coherent-light
//! Mach-Zehnder interferometer.
//!
//! The crate is `no_std` (it needs `alloc`). It is organised bottom-up:
//!
//! * [`specfun`]: error function, Lambert W, Gauss-Hermite rules, scalar
//!   minimisation and monotone inversion.
//! * [`interferometer`]: output statistics of the interferometer, the four
//!   binary detection models, photon loss and phase diffusion.
//! * [`metrology`]: Fisher information, error-propagation sensitivity,
//!   fringe width and optimal working points, with the closed-form
//!   predictions they are compared against.
//! * [`estimator`]: Monte Carlo simulation of the signal-inversion estimator.

#![no_std]
// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod estimator;
pub mod interferometer;
pub mod metrology;
pub mod specfun;

pub use estimator::{EstimationReport, ExperimentSpec};
pub use interferometer::{BinaryModel, DetectionScheme, InterferometerConfig};
pub use metrology::{OptimumReport, SensitivityScan};
pub use specfun::{Bracket, QuadratureRule};
