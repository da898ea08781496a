use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::sqrt;

use super::model::Diffusion;
use super::{binary_model, BinaryModel, DetectionScheme, InterferometerConfig, ModelError};
use crate::specfun::{gauss_hermite, QuadratureRule, DEFAULT_ORDER, MAX_ORDER};

/// Largest change allowed when the diffusion quadrature is refined.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-9;

// Integration range in the standardised kernel variable t; the Gaussian mass
// beyond it is below 1e-18.
const KERNEL_HALF_WIDTH: f64 = 6.5;
// Node spacing, in units of 1/Δ, that resolves the noiseless integrands.
const RESOLUTION: f64 = 0.5;
// Nodes whose normalised weight falls below this are dropped.
const NEGLIGIBLE_WEIGHT: f64 = 1e-30;

/// Convolves a noiseless model with the phase-diffusion kernel
/// `exp[-(ξ-φ)²/4γ] / sqrt(4πγ)`.
///
/// With `ξ = φ + 2 sqrt(γ) t` the convolution becomes `∫ e^{-t²} P(φ + 2
/// sqrt(γ) t) dt / sqrt(π)`, evaluated with `rule`. The integrand is resolved
/// when the node spacing inside `|t| <= 6.5` is at most `0.5 / Δ` with
/// `Δ = sqrt(1 + 2Nγ)`; when `rule` is coarser, higher Gauss-Hermite orders
/// are tried and, past order 256, a trapezoidal rule at that spacing is
/// used. The result is then compared against a rule of twice the resolution
/// and rejected if any probe phase moves by more than
/// [`CONVERGENCE_TOLERANCE`].
///
/// `γ = 0` returns the model unchanged. Diffusing an already diffused model
/// adds the rates.
pub fn diffuse_model(
    model: &BinaryModel,
    gamma: f64,
    rule: &QuadratureRule,
) -> Result<BinaryModel, ModelError> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(ModelError::InvalidConfig {
            field: "diffusion rate",
            value: gamma,
        });
    }
    if gamma == 0.0 {
        return Ok(model.clone());
    }
    let total = model.diffusion_rate() + gamma;
    let base = model.noiseless();
    let photons = base.effective_photons();
    let delta = sqrt(1.0 + 2.0 * photons * total);
    let required = RESOLUTION / delta;

    let (chosen, refined) = select_rules(rule, required)?;
    let diffused = base.with_diffusion(kernel(total, &chosen));
    let check = base.with_diffusion(kernel(total, &refined));

    let scale = delta / sqrt(photons.max(1.0));
    let probes = [
        0.0,
        0.5 * scale,
        scale,
        2.0 * scale,
        4.0 * scale,
        0.3,
        1.0,
        PI / 2.0,
    ];
    for &phi in &probes {
        let a = diffused.evaluate(phi);
        let b = check.evaluate(phi);
        let shift = (a.p_plus - b.p_plus)
            .abs()
            .max((a.slope - b.slope).abs() * sqrt(total));
        if !(shift <= CONVERGENCE_TOLERANCE) {
            return Err(ModelError::QuadratureNotConverged { phi, shift });
        }
    }
    Ok(diffused)
}

/// Model for `scheme` under `cfg`, including diffusion when `γ > 0`, with
/// the default Gauss-Hermite order.
pub fn build_model(
    cfg: &InterferometerConfig,
    scheme: DetectionScheme,
) -> Result<BinaryModel, ModelError> {
    build_model_with_order(cfg, scheme, DEFAULT_ORDER)
}

pub fn build_model_with_order(
    cfg: &InterferometerConfig,
    scheme: DetectionScheme,
    order: usize,
) -> Result<BinaryModel, ModelError> {
    let model = binary_model(cfg, scheme)?;
    if cfg.diffusion_rate() == 0.0 {
        return Ok(model);
    }
    let rule = gauss_hermite(order)?;
    diffuse_model(&model, cfg.diffusion_rate(), &rule)
}

fn max_spacing(rule: &QuadratureRule) -> f64 {
    let nodes = rule.nodes();
    let inside = nodes
        .iter()
        .filter(|t| t.abs() <= KERNEL_HALF_WIDTH)
        .count();
    // The outermost gap reaching past the window counts too.
    let mut widest = 0.0f64;
    for pair in nodes.windows(2) {
        if pair[1] >= -KERNEL_HALF_WIDTH && pair[0] <= KERNEL_HALF_WIDTH {
            widest = widest.max(pair[1] - pair[0]);
        }
    }
    if inside < 2 || nodes[0] > -KERNEL_HALF_WIDTH + 1.0 {
        f64::INFINITY
    } else {
        widest
    }
}

fn select_rules(
    rule: &QuadratureRule,
    required: f64,
) -> Result<(QuadratureRule, QuadratureRule), ModelError> {
    let mut candidate = rule.clone();
    loop {
        if max_spacing(&candidate) <= required {
            let next = candidate.order() * 2;
            let refined = if next <= MAX_ORDER {
                gauss_hermite(next)?
            } else {
                QuadratureRule::hermite_trapezoid(required / 2.0, KERNEL_HALF_WIDTH)?
            };
            return Ok((candidate, refined));
        }
        let next = candidate.order() * 2;
        if next > MAX_ORDER {
            break;
        }
        candidate = gauss_hermite(next)?;
    }
    let chosen = QuadratureRule::hermite_trapezoid(required, KERNEL_HALF_WIDTH)?;
    let refined = QuadratureRule::hermite_trapezoid(required / 2.0, KERNEL_HALF_WIDTH)?;
    Ok((chosen, refined))
}

fn kernel(gamma: f64, rule: &QuadratureRule) -> Diffusion {
    let scale = 2.0 * sqrt(gamma);
    let norm = 1.0 / sqrt(PI);
    let mut offsets = Vec::with_capacity(rule.order());
    let mut weights = Vec::with_capacity(rule.order());
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let w = w * norm;
        if w >= NEGLIGIBLE_WEIGHT {
            offsets.push(scale * t);
            weights.push(w);
        }
    }
    Diffusion {
        gamma,
        order: rule.order(),
        offsets,
        weights,
    }
}
