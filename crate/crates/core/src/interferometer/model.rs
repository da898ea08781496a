use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, SQRT_2};

use libm::{cos, exp, expm1, sin, sqrt};

use super::{DetectionScheme, InterferometerConfig, ModelError};
use crate::specfun::{erf, erfc};

/// Outcome probabilities and slope at one phase.
///
/// `p_minus` is computed directly rather than as `1 - p_plus`, so it keeps
/// its relative accuracy when `p_plus` is close to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomePoint {
    pub p_plus: f64,
    pub p_minus: f64,
    /// `∂P(+|φ)/∂φ`.
    pub slope: f64,
}

/// Binary measurement model `P(±|φ)` with outcome labels `μ±`.
///
/// All four schemes are even and 2π-periodic in φ. A diffused model carries
/// a fixed set of phase offsets and normalised weights; evaluation is a
/// plain weighted sum of the noiseless closed forms, so models are cheap to
/// clone and safe to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    scheme: DetectionScheme,
    photons: f64,
    diffusion: Option<Diffusion>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Diffusion {
    pub(crate) gamma: f64,
    pub(crate) order: usize,
    pub(crate) offsets: Vec<f64>,
    pub(crate) weights: Vec<f64>,
}

/// Noiseless closed form of `scheme` at effective photon number `N·T`.
/// The diffusion rate of `cfg` is ignored; see
/// [`diffuse_model`](super::diffuse_model).
pub fn binary_model(
    cfg: &InterferometerConfig,
    scheme: DetectionScheme,
) -> Result<BinaryModel, ModelError> {
    scheme.validate()?;
    Ok(BinaryModel {
        scheme,
        photons: cfg.effective_photons(),
        diffusion: None,
    })
}

impl BinaryModel {
    pub(crate) fn with_diffusion(&self, diffusion: Diffusion) -> Self {
        Self {
            scheme: self.scheme,
            photons: self.photons,
            diffusion: Some(diffusion),
        }
    }

    pub(crate) fn noiseless(&self) -> Self {
        Self {
            scheme: self.scheme,
            photons: self.photons,
            diffusion: None,
        }
    }

    pub fn scheme(&self) -> DetectionScheme {
        self.scheme
    }

    pub fn effective_photons(&self) -> f64 {
        self.photons
    }

    pub fn diffusion_rate(&self) -> f64 {
        self.diffusion.as_ref().map_or(0.0, |d| d.gamma)
    }

    /// Number of quadrature nodes behind a diffused model.
    pub fn quadrature_order(&self) -> Option<usize> {
        self.diffusion.as_ref().map(|d| d.order)
    }

    pub fn outcome_values(&self) -> (f64, f64) {
        self.scheme.outcome_values()
    }

    /// True for the `p0 → 0` homodyne model, whose `p_plus` is a density
    /// bounded by `sqrt(2/π)`.
    pub fn is_density(&self) -> bool {
        self.scheme.is_density()
    }

    pub fn evaluate(&self, phi: f64) -> OutcomePoint {
        match &self.diffusion {
            None => closed_form(self.scheme, self.photons, phi),
            Some(d) => {
                let (mut plus, mut minus, mut slope) = (0.0, 0.0, 0.0);
                for (&offset, &w) in d.offsets.iter().zip(&d.weights) {
                    let point = closed_form(self.scheme, self.photons, phi + offset);
                    plus += w * point.p_plus;
                    minus += w * point.p_minus;
                    slope += w * point.slope;
                }
                OutcomePoint {
                    p_plus: plus,
                    p_minus: minus,
                    slope,
                }
            }
        }
    }

    pub fn p_plus(&self, phi: f64) -> f64 {
        self.evaluate(phi).p_plus
    }

    pub fn p_minus(&self, phi: f64) -> f64 {
        self.evaluate(phi).p_minus
    }

    pub fn slope(&self, phi: f64) -> f64 {
        self.evaluate(phi).slope
    }

    /// Average signal `⟨μ⟩ = μ₊ P(+) + μ₋ P(-)`.
    pub fn signal(&self, phi: f64) -> f64 {
        let point = self.evaluate(phi);
        let (up, down) = self.outcome_values();
        up * point.p_plus + down * point.p_minus
    }

    /// `∂⟨μ⟩/∂φ`.
    pub fn signal_slope(&self, phi: f64) -> f64 {
        let (up, down) = self.outcome_values();
        (up - down) * self.slope(phi)
    }

    /// Fisher information at points where one outcome has probability
    /// exactly zero, when a finite limit is known: the noiseless
    /// photon-counting schemes at the dark fringe give `N`.
    pub fn fisher_limit(&self, phi: f64) -> Option<f64> {
        if self.diffusion.is_some() {
            return None;
        }
        match self.scheme {
            DetectionScheme::Parity | DetectionScheme::ZeroNonzero if sin(phi / 2.0) == 0.0 => {
                Some(self.photons)
            }
            _ => None,
        }
    }
}

fn closed_form(scheme: DetectionScheme, photons: f64, phi: f64) -> OutcomePoint {
    match scheme {
        DetectionScheme::Parity => {
            // P(+1) = (1 + exp(-2N sin²(φ/2))) / 2
            let s = sin(phi / 2.0);
            let x = -2.0 * photons * s * s;
            let e = exp(x);
            OutcomePoint {
                p_plus: 0.5 * (1.0 + e),
                p_minus: -0.5 * expm1(x),
                slope: -0.5 * photons * sin(phi) * e,
            }
        }
        DetectionScheme::ZeroNonzero => {
            // P(0) = exp(-N sin²(φ/2))
            let s = sin(phi / 2.0);
            let x = -photons * s * s;
            let e = exp(x);
            OutcomePoint {
                p_plus: e,
                p_minus: -expm1(x),
                slope: -0.5 * photons * sin(phi) * e,
            }
        }
        DetectionScheme::HomodyneZero => {
            // sqrt(2/π) exp(-(N/2) sin²φ); the complement follows the
            // projector convention ⟨p₊²⟩ = ⟨p₊⟩.
            let s = sin(phi);
            let d = sqrt(FRAC_2_PI) * exp(-0.5 * photons * s * s);
            OutcomePoint {
                p_plus: d,
                p_minus: 1.0 - d,
                slope: -photons * s * cos(phi) * d,
            }
        }
        DetectionScheme::HomodyneWindow { p0 } => window(p0, photons, phi),
    }
}

// Gaussian of mean -c and variance 1/4, integrated over |p| <= p0.
fn window(p0: f64, photons: f64, phi: f64) -> OutcomePoint {
    let root = sqrt(photons);
    let c = root * sin(phi) / 2.0;
    let a = SQRT_2 * (p0 + c);
    let b = SQRT_2 * (p0 - c);
    let (p_plus, p_minus) = if a >= 0.0 && b >= 0.0 {
        (0.5 * (erf(a) + erf(b)), 0.5 * (erfc(a) + erfc(b)))
    } else if b < 0.0 {
        let plus = 0.5 * (erfc(-b) - erfc(a));
        (plus, 0.5 * (erfc(a) + erfc(b)))
    } else {
        let plus = 0.5 * (erfc(-a) - erfc(b));
        (plus, 0.5 * (erfc(a) + erfc(b)))
    };
    let dc = root * cos(phi) / 2.0;
    let slope = sqrt(FRAC_2_PI) * (exp(-a * a) - exp(-b * b)) * dc;
    OutcomePoint {
        p_plus,
        p_minus,
        slope,
    }
}
