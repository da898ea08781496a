//! Fisher information, error-propagation sensitivity, fringe width and
//! best-sensitivity search for binary-outcome models.

pub mod analytic;
mod fisher;
mod optimum;

pub use fisher::{
    crb_saturation_check, fisher_binary, fisher_homodyne_full, fisher_intensity,
    fisher_outcome_sum, information, sensitivity, Derivative, Information, DEFAULT_STEP,
    STATIONARY_SLOPE,
};
pub use optimum::{
    best_sensitivity, default_bracket, fwhm, homodyne_approximation, optimize_model, phase_grid,
    scan, scan_model, window_best_sensitivity, ApproximationPoint, OptimumReport, ScanRow,
    SensitivityScan, APPROXIMATION_FLAG,
};

use thiserror::Error;

use crate::interferometer::ModelError;
use crate::specfun::SpecfunError;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetrologyError {
    #[error("outcome probability is exactly zero at phi = {phi} and no limit is known")]
    Degenerate { phi: f64 },
    #[error("closed form requires gamma = 0, got {0}")]
    DiffusionOutOfScope(f64),
    #[error("derivative step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("phase grid must be nonempty, finite and strictly increasing")]
    InvalidGrid,
    #[error("search bracket [{lo}, {hi}] leaves [0, pi/2]")]
    BracketOutOfRange { lo: f64, hi: f64 },
    #[error("sensitivity is infinite over the whole search bracket")]
    NoFiniteSensitivity,
    #[error("signal has no half-maximum crossing within pi of the peak")]
    NoHalfMaximum,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}
