use core::fmt;

use super::ModelError;

/// Rule that turns the raw measurement record into one of two outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionScheme {
    /// Homodyne detection of the phase quadrature; `+` when `|p| <= p0`.
    HomodyneWindow { p0: f64 },
    /// The `p0 → 0` limit: the quadrature density at `p = 0`, treated as a
    /// projector expectation value.
    HomodyneZero,
    /// Even (`+1`) or odd (`-1`) photon number at output port c.
    Parity,
    /// Zero (`+`) or any (`-`) photons at output port c.
    ZeroNonzero,
}

impl DetectionScheme {
    pub fn window(p0: f64) -> Result<Self, ModelError> {
        let scheme = Self::HomodyneWindow { p0 };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Self::HomodyneWindow { p0 } if !(p0 > 0.0 && p0.is_finite()) => {
                Err(ModelError::InvalidWindow(p0))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::HomodyneWindow { .. } => "homodyne-window",
            Self::HomodyneZero => "homodyne-zero",
            Self::Parity => "parity",
            Self::ZeroNonzero => "zero-nonzero",
        }
    }

    /// Outcome labels `(μ₊, μ₋)`.
    pub fn outcome_values(&self) -> (f64, f64) {
        match self {
            Self::Parity => (1.0, -1.0),
            _ => (1.0, 0.0),
        }
    }

    pub fn is_density(&self) -> bool {
        matches!(self, Self::HomodyneZero)
    }

    pub fn is_homodyne(&self) -> bool {
        matches!(self, Self::HomodyneWindow { .. } | Self::HomodyneZero)
    }
}

impl fmt::Display for DetectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HomodyneWindow { p0 } => write!(f, "{}(p0={})", self.name(), p0),
            _ => f.write_str(self.name()),
        }
    }
}
