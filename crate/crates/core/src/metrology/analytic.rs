//! Closed-form sensitivities, optimum predictions and fringe widths.
//!
//! Inputs are the effective photon number `n` (after loss) and the
//! diffusion rate `gamma`. Optima are the small-phase, large-`n`
//! predictions; the exact values come from
//! [`best_sensitivity`](super::best_sensitivity).

use core::f64::consts::{E, FRAC_PI_2, LN_2};

use libm::{acos, exp, expm1, fabs, sin, sqrt};

use super::MetrologyError;
use crate::interferometer::DetectionScheme;
use crate::specfun::lambert_w0;

/// `η = (sqrt(eπ/2) - 1)^{1/2} ≈ 1.0327`.
pub fn homodyne_eta() -> f64 {
    sqrt(sqrt(E * FRAC_PI_2) - 1.0)
}

/// Noiseless density-homodyne sensitivity
/// `(2/N) (sqrt(π/2) e^{(N/2) sin²φ} - 1)^{1/2} / |sin 2φ|`.
pub fn homodyne_sensitivity(n: f64, phi: f64) -> f64 {
    let s = sin(phi);
    let inner = sqrt(FRAC_PI_2) * exp(0.5 * n * s * s) - 1.0;
    2.0 / n * sqrt(inner) / fabs(sin(2.0 * phi))
}

/// Noiseless parity sensitivity `sqrt(e^{4N sin²(φ/2)} - 1) / (N |sin φ|)`.
pub fn parity_sensitivity(n: f64, phi: f64) -> f64 {
    let s = sin(phi / 2.0);
    sqrt(expm1(4.0 * n * s * s)) / (n * fabs(sin(phi)))
}

/// Noiseless zero-nonzero sensitivity
/// `2 sqrt(e^{N sin²(φ/2)} - 1) / (N |sin φ|)`.
pub fn zero_sensitivity(n: f64, phi: f64) -> f64 {
    let s = sin(phi / 2.0);
    2.0 * sqrt(expm1(n * s * s)) / (n * fabs(sin(phi)))
}

/// Small-phase sensitivity of the diffused density homodyne model,
/// `(Δ²/(N|φ|)) sqrt(Δ sqrt(π/2) e^{Nφ²/(2Δ²)} - 1)`.
pub fn homodyne_diffused_sensitivity(n: f64, gamma: f64, phi: f64) -> f64 {
    let d2 = 1.0 + 2.0 * n * gamma;
    let delta = sqrt(d2);
    let inner = delta * sqrt(FRAC_PI_2) * exp(n * phi * phi / (2.0 * d2)) - 1.0;
    d2 / (n * fabs(phi)) * sqrt(inner)
}

/// Closed-form optimum of one scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptimum {
    pub phi_min: f64,
    pub delta_phi_min: f64,
    /// First-order expansion in `Nγ`, including the `sqrt(Nγ)` term for
    /// photon counting.
    pub series: f64,
}

/// Noiseless density-homodyne optimum at `N sin²2φ = 4 cos 2φ`.
pub fn homodyne_optimum_phase(n: f64) -> f64 {
    0.5 * acos((sqrt(4.0 + n * n) - 2.0) / n)
}

/// Homodyne optimum: `η/sqrt(N)` at `γ = 0`,
/// `Δ (Δ sqrt(eπ/2) - 1)^{1/2} / sqrt(N)` at `φ ≈ Δ/sqrt(N)` otherwise.
pub fn homodyne_optimum(n: f64, gamma: f64) -> AnalyticOptimum {
    let eta = homodyne_eta();
    let root_n = sqrt(n);
    let ng = n * gamma;
    let series = eta / root_n * (1.0 + (3.0 * eta * eta + 1.0) / (2.0 * eta * eta) * ng);
    if gamma == 0.0 {
        return AnalyticOptimum {
            phi_min: homodyne_optimum_phase(n),
            delta_phi_min: eta / root_n,
            series,
        };
    }
    let delta = sqrt(1.0 + 2.0 * ng);
    AnalyticOptimum {
        phi_min: delta / root_n,
        delta_phi_min: delta * sqrt(delta * sqrt(E * FRAC_PI_2) - 1.0) / root_n,
        series,
    }
}

/// Parity optimum `(Δ²/sqrt(N)) exp[(1 + w)/2]` at `φ = Δ sqrt((1 + w)/N)`,
/// `w = W0(-e^{-1} Δ^{-2})`. Collapses to `1/sqrt(N)` at `φ = 0` without
/// diffusion.
pub fn parity_optimum(n: f64, gamma: f64) -> Result<AnalyticOptimum, MetrologyError> {
    let ng = n * gamma;
    let d2 = 1.0 + 2.0 * ng;
    let w = branch_lambert(-1.0 / (E * d2))?;
    let root_n = sqrt(n);
    Ok(AnalyticOptimum {
        phi_min: sqrt(d2 * (1.0 + w) / n),
        delta_phi_min: d2 * exp(0.5 * (1.0 + w)) / root_n,
        series: (1.0 + sqrt(ng) + 11.0 * ng / 6.0) / root_n,
    })
}

/// Zero-nonzero optimum `Δ0 / sqrt(-N w)` at `φ = 2 Δ0 sqrt((1 + w)/N)`,
/// `w = W0(-e^{-1} Δ0^{-1})`.
pub fn zero_optimum(n: f64, gamma: f64) -> Result<AnalyticOptimum, MetrologyError> {
    let ng = n * gamma;
    let d0 = sqrt(1.0 + ng);
    let w = branch_lambert(-1.0 / (E * d0))?;
    let root_n = sqrt(n);
    Ok(AnalyticOptimum {
        phi_min: 2.0 * d0 * sqrt((1.0 + w) / n),
        delta_phi_min: d0 / sqrt(-n * w),
        series: (1.0 + 0.5 * sqrt(ng) + 17.0 * ng / 24.0) / root_n,
    })
}

// W0 near -1/e, with 1 + w clamped at zero.
fn branch_lambert(z: f64) -> Result<f64, MetrologyError> {
    let w = lambert_w0(z)?;
    Ok(w.max(-1.0))
}

/// Closed-form optimum for `scheme`, if one exists.
pub fn analytic_optimum(
    scheme: DetectionScheme,
    n: f64,
    gamma: f64,
) -> Result<Option<AnalyticOptimum>, MetrologyError> {
    Ok(match scheme {
        DetectionScheme::HomodyneZero => Some(homodyne_optimum(n, gamma)),
        DetectionScheme::Parity => Some(parity_optimum(n, gamma)?),
        DetectionScheme::ZeroNonzero => Some(zero_optimum(n, gamma)?),
        DetectionScheme::HomodyneWindow { .. } => None,
    })
}

/// Gaussian-fringe width: `2Δ sqrt(2 ln2 / N)` for homodyne-zero and
/// parity, `4Δ0 sqrt(ln2 / N)` for zero-nonzero.
pub fn analytic_fwhm(scheme: DetectionScheme, n: f64, gamma: f64) -> Option<f64> {
    match scheme {
        DetectionScheme::HomodyneZero | DetectionScheme::Parity => {
            Some(2.0 * sqrt(1.0 + 2.0 * n * gamma) * sqrt(2.0 * LN_2 / n))
        }
        DetectionScheme::ZeroNonzero => Some(4.0 * sqrt(1.0 + n * gamma) * sqrt(LN_2 / n)),
        DetectionScheme::HomodyneWindow { .. } => None,
    }
}

/// Large-`Nγ` fringe width of the diffused photon-counting signals.
pub fn saturated_fwhm(gamma: f64) -> f64 {
    4.0 * sqrt(gamma * LN_2)
}

/// Shot-noise limit `1/sqrt(N)`.
pub fn shot_noise(n: f64) -> f64 {
    1.0 / sqrt(n)
}
