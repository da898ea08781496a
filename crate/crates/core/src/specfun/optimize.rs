use super::{Bracket, SpecfunError};

/// Iteration budget shared by the minimiser and the root finder.
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Local minimum of `f` on `bracket` by Brent's method (golden section with
/// parabolic interpolation).
///
/// `tol` is an absolute tolerance in `x`. For a function monotone on the
/// bracket the result lands within `tol` of the lower-valued end. Values of
/// `f` may be `+inf`; parabolic steps are skipped whenever they would use a
/// non-finite value.
pub fn minimize_scalar<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<Minimum, SpecfunError>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SpecfunError::InvalidTolerance(tol));
    }
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let rel = 4.0 * f64::EPSILON;

    let (mut a, mut b) = (bracket.lo(), bracket.hi());
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for iteration in 0..MAX_ITERATIONS {
        let m = 0.5 * (a + b);
        let tol1 = rel * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iteration,
            });
        }

        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(SpecfunError::NoConvergence(MAX_ITERATIONS))
}

/// Solves `f(x) = target` for `f` monotone on `bracket`, returning `x` with
/// `|f(x) - target| <= tol`.
///
/// Brent-Dekker iteration (bisection, secant and inverse quadratic steps).
/// Fails with [`SpecfunError::TargetOutOfRange`] when `f(lo)` and `f(hi)`
/// do not straddle the target.
pub fn invert_monotone<F>(
    mut f: F,
    target: f64,
    bracket: Bracket,
    tol: f64,
) -> Result<f64, SpecfunError>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SpecfunError::InvalidTolerance(tol));
    }
    let (mut a, mut b) = (bracket.lo(), bracket.hi());
    let f_lo = f(a);
    let f_hi = f(b);
    let mut fa = f_lo - target;
    let mut fb = f_hi - target;
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(SpecfunError::TargetOutOfRange {
            target,
            lower: f_lo.min(f_hi),
            upper: f_lo.max(f_hi),
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let x_tol = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let m = 0.5 * (c - b);
        if fb.abs() <= tol || fb == 0.0 || m.abs() <= x_tol {
            return Ok(b);
        }
        if e.abs() >= x_tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (x_tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > x_tol {
            d
        } else {
            x_tol.copysign(m)
        };
        fb = f(b) - target;
    }
    Err(SpecfunError::NoConvergence(MAX_ITERATIONS))
}
