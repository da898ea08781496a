//! Coherent-state Mach-Zehnder output statistics and binary detection
//! models, with photon loss and Gaussian phase diffusion.

mod config;
mod diffusion;
mod model;
mod scheme;
mod statistics;

pub use config::{apply_loss, InterferometerConfig};
pub use diffusion::{build_model, build_model_with_order, diffuse_model, CONVERGENCE_TOLERANCE};
pub use model::{binary_model, BinaryModel, OutcomePoint};
pub use scheme::DetectionScheme;
pub use statistics::{
    brute_force_binary, coincidence_prob, homodyne_density, intensity_signal, poisson_tail_bound,
    recommended_cutoff, FockSum, TAIL_TOLERANCE,
};

use thiserror::Error;

use crate::specfun::SpecfunError;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid {field}: {value}")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("homodyne window half-width must be positive and finite, got {0}")]
    InvalidWindow(f64),
    #[error("{0} detection is not a photon-counting scheme")]
    UnsupportedScheme(&'static str),
    #[error("diffusion quadrature not converged at phi = {phi}: refinement moved the result by {shift:e}")]
    QuadratureNotConverged { phi: f64, shift: f64 },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}
