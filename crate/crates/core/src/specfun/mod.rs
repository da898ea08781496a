//! Special functions and scalar numerics used by the physical model.

mod erf;
mod lambert;
mod optimize;
mod quadrature;

pub use erf::{erf, erfc};
pub use lambert::lambert_w0;
pub use optimize::{invert_monotone, minimize_scalar, Minimum, MAX_ITERATIONS};
pub use quadrature::{gauss_hermite, QuadratureRule, DEFAULT_ORDER, MAX_ORDER, MIN_ORDER};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecfunError {
    #[error("Lambert W argument {0} lies below the branch point -1/e")]
    LambertDomain(f64),
    #[error("quadrature order {0} outside {MIN_ORDER}..={MAX_ORDER}")]
    QuadratureOrder(usize),
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("target {target} outside the range [{lower}, {upper}] spanned on the bracket")]
    TargetOutOfRange { target: f64, lower: f64, upper: f64 },
}

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SpecfunError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(SpecfunError::InvalidBracket { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}
