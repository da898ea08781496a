use core::f64::consts::E;

use libm::{exp, log, log1p, sqrt};

use super::SpecfunError;

const MAX_ITERATIONS: usize = 64;

/// Principal branch `W0` of the Lambert W function: the solution `w >= -1`
/// of `w * exp(w) = z`, defined for `z >= -1/e`.
///
/// Near the branch point the iteration is started from the series in
/// `p = sqrt(2 (e z + 1))`; elsewhere from logarithmic estimates. Halley
/// steps then run until the update drops below 1e-15 relative.
pub fn lambert_w0(z: f64) -> Result<f64, SpecfunError> {
    if z.is_nan() {
        return Err(SpecfunError::LambertDomain(z));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let q = E * z + 1.0;
    if q < 0.0 {
        // Allow the rounding error of forming e*z for z = -1/e.
        if q > -4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(SpecfunError::LambertDomain(z));
    }
    if q == 0.0 {
        return Ok(-1.0);
    }

    let mut w = initial_guess(z, q);
    for _ in 0..MAX_ITERATIONS {
        let ew = exp(w);
        let f = w * ew - z;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

fn initial_guess(z: f64, q: f64) -> f64 {
    if q < 0.3 {
        let p = sqrt(2.0 * q);
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)))
    } else if z < 3.0 {
        // Winitzki's approximation.
        let l = log1p(z);
        l * (1.0 - log1p(l) / (2.0 + l))
    } else {
        let l1 = log(z);
        let l2 = log(l1);
        l1 - l2 + l2 / l1
    }
}
