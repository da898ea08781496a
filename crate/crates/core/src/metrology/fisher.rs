use libm::{cos, sin, sqrt};

use super::MetrologyError;
use crate::interferometer::{BinaryModel, InterferometerConfig, OutcomePoint};

/// Slopes below this magnitude are treated as stationary points.
pub const STATIONARY_SLOPE: f64 = 1e-12;

/// Default central-difference step in radians.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Source of `∂P(+|φ)/∂φ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Derivative {
    /// Closed-form slope, differentiated under the diffusion integral.
    #[default]
    Analytic,
    /// Central difference with the given step.
    Central(f64),
}

impl Derivative {
    fn slope(self, model: &BinaryModel, phi: f64) -> Result<f64, MetrologyError> {
        match self {
            Self::Analytic => Ok(model.slope(phi)),
            Self::Central(h) => {
                check_step(h)?;
                Ok((model.p_plus(phi + h) - model.p_plus(phi - h)) / (2.0 * h))
            }
        }
    }
}

fn check_step(h: f64) -> Result<(), MetrologyError> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(MetrologyError::InvalidStep(h))
    }
}

/// Fisher information and error-propagation sensitivity at one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Information {
    pub fisher: f64,
    /// `δφ = 1/sqrt(fisher)`; infinite where `fisher = 0`.
    pub delta_phi: f64,
    /// One outcome has probability exactly zero.
    pub degenerate: bool,
}

/// Combines probabilities and slope into `F = P'² / (P₊ P₋)` and
/// `δφ = sqrt(P₊ P₋) / |P'|`.
///
/// At degenerate points `limit` supplies the Fisher information; without
/// one the point is reported as uninformative.
pub fn information(point: OutcomePoint, limit: Option<f64>) -> Information {
    let OutcomePoint {
        p_plus,
        p_minus,
        slope,
    } = point;
    let degenerate = p_plus <= 0.0 || p_minus <= 0.0;
    if degenerate {
        return match limit {
            Some(f) if f > 0.0 => Information {
                fisher: f,
                delta_phi: 1.0 / sqrt(f),
                degenerate,
            },
            _ => Information {
                fisher: 0.0,
                delta_phi: f64::INFINITY,
                degenerate,
            },
        };
    }
    if !(slope.abs() >= STATIONARY_SLOPE) {
        return Information {
            fisher: 0.0,
            delta_phi: f64::INFINITY,
            degenerate,
        };
    }
    let spread = sqrt(p_plus) * sqrt(p_minus);
    let ratio = slope / spread;
    Information {
        fisher: ratio * ratio,
        delta_phi: spread / slope.abs(),
        degenerate,
    }
}

/// Binary-outcome Fisher information
/// `F = (∂P/∂φ)² [1/P(+) + 1/P(-)]`.
///
/// Returns the analytic limit at degenerate points where one is known and
/// [`MetrologyError::Degenerate`] otherwise. Stationary points give 0.
pub fn fisher_binary(
    model: &BinaryModel,
    phi: f64,
    derivative: Derivative,
) -> Result<f64, MetrologyError> {
    let mut point = model.evaluate(phi);
    point.slope = derivative.slope(model, phi)?;
    let info = information(point, model.fisher_limit(phi));
    if info.degenerate && model.fisher_limit(phi).is_none() {
        return Err(MetrologyError::Degenerate { phi });
    }
    Ok(info.fisher)
}

/// Error-propagation sensitivity `sqrt(P(+) P(-)) / |∂P(+)/∂φ|`; infinite
/// at stationary and uninformative points.
pub fn sensitivity(
    model: &BinaryModel,
    phi: f64,
    derivative: Derivative,
) -> Result<f64, MetrologyError> {
    let mut point = model.evaluate(phi);
    point.slope = derivative.slope(model, phi)?;
    Ok(information(point, model.fisher_limit(phi)).delta_phi)
}

/// Fisher information as the outcome sum `Σ_k (∂P_k/∂φ)² / P_k`, each
/// outcome probability differentiated separately by central differences.
pub fn fisher_outcome_sum(model: &BinaryModel, phi: f64, h: f64) -> Result<f64, MetrologyError> {
    check_step(h)?;
    let centre = model.evaluate(phi);
    let up = model.evaluate(phi + h);
    let down = model.evaluate(phi - h);
    let mut total = 0.0;
    for (p, hi, lo) in [
        (centre.p_plus, up.p_plus, down.p_plus),
        (centre.p_minus, up.p_minus, down.p_minus),
    ] {
        if p <= 0.0 {
            return Err(MetrologyError::Degenerate { phi });
        }
        let d = (hi - lo) / (2.0 * h);
        total += d * d / p;
    }
    Ok(total)
}

/// Largest `|δφ sqrt(F) - 1|` over `grid`, with `δφ` from the analytic
/// slope and `F` from `fisher`: the analytic slope, or
/// [`fisher_outcome_sum`] for a central-difference step.
///
/// A point with `δφ = ∞` and `F = 0` satisfies the identity. Central
/// differences only resolve slopes well above `ε P / h`; flatter points
/// report large violations.
pub fn crb_saturation_check(
    model: &BinaryModel,
    grid: &[f64],
    fisher: Derivative,
) -> Result<f64, MetrologyError> {
    let mut worst = 0.0f64;
    for &phi in grid {
        let delta = sensitivity(model, phi, Derivative::Analytic)?;
        let f = match fisher {
            Derivative::Analytic => {
                information(model.evaluate(phi), model.fisher_limit(phi)).fisher
            }
            Derivative::Central(h) => fisher_outcome_sum(model, phi, h)?,
        };
        let violation = if delta == f64::INFINITY && f == 0.0 {
            0.0
        } else {
            (delta * sqrt(f) - 1.0).abs()
        };
        if !(violation <= worst) {
            worst = if violation.is_nan() {
                f64::INFINITY
            } else {
                violation
            };
        }
    }
    Ok(worst)
}

/// Full-quadrature homodyne Fisher information `N cos²φ`.
pub fn fisher_homodyne_full(cfg: &InterferometerConfig, phi: f64) -> Result<f64, MetrologyError> {
    noiseless_only(cfg)?;
    let c = cos(phi);
    Ok(cfg.effective_photons() * c * c)
}

/// Output-intensity Fisher information `N sin²(φ/2)`.
pub fn fisher_intensity(cfg: &InterferometerConfig, phi: f64) -> Result<f64, MetrologyError> {
    noiseless_only(cfg)?;
    let s = sin(phi / 2.0);
    Ok(cfg.effective_photons() * s * s)
}

fn noiseless_only(cfg: &InterferometerConfig) -> Result<(), MetrologyError> {
    match cfg.diffusion_rate() {
        gamma if gamma > 0.0 => Err(MetrologyError::DiffusionOutOfScope(gamma)),
        _ => Ok(()),
    }
}
