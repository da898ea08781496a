use core::f64::consts::FRAC_2_SQRT_PI;

use libm::exp;

/// Below this magnitude the positive-term series is used, above it the
/// continued fraction for `erfc`.
const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 500;

/// Error function, absolute error below 1e-14 on the whole real line.
///
/// `erf(-x) == -erf(x)` holds exactly because only `|x|` is evaluated.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let value = if a < SERIES_LIMIT {
        erf_series(a)
    } else {
        1.0 - erfc_fraction(a)
    };
    if x.is_sign_negative() {
        -value
    } else {
        value
    }
}

/// Complementary error function `1 - erf(x)`, accurate in relative terms in
/// the right tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let tail = if a < SERIES_LIMIT {
        1.0 - erf_series(a)
    } else {
        erfc_fraction(a)
    };
    if x.is_sign_negative() {
        2.0 - tail
    } else {
        tail
    }
}

// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (2n+1)!!
// Every term is positive, so there is no cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * exp(-x2) * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz algorithm.
fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_TERMS {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    0.5 * FRAC_2_SQRT_PI * exp(-x * x) / f
}
