use libm::sqrt;

use super::ModelError;

/// Physical scenario: mean photon number `N`, dimensionless diffusion rate
/// `γ` and arm transmission `T`.
///
/// Every probability formula consumes the effective photon number `N·T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    mean_photons: f64,
    diffusion_rate: f64,
    transmission: f64,
}

impl InterferometerConfig {
    pub fn new(
        mean_photons: f64,
        diffusion_rate: f64,
        transmission: f64,
    ) -> Result<Self, ModelError> {
        if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
            return Err(ModelError::InvalidConfig {
                field: "mean photon number",
                value: mean_photons,
            });
        }
        if !(diffusion_rate >= 0.0 && diffusion_rate.is_finite()) {
            return Err(ModelError::InvalidConfig {
                field: "diffusion rate",
                value: diffusion_rate,
            });
        }
        if !(0.0..=1.0).contains(&transmission) {
            return Err(ModelError::InvalidConfig {
                field: "transmission",
                value: transmission,
            });
        }
        Ok(Self {
            mean_photons,
            diffusion_rate,
            transmission,
        })
    }

    /// Lossless and noiseless interferometer.
    pub fn ideal(mean_photons: f64) -> Result<Self, ModelError> {
        Self::new(mean_photons, 0.0, 1.0)
    }

    pub fn with_diffusion(self, diffusion_rate: f64) -> Result<Self, ModelError> {
        Self::new(self.mean_photons, diffusion_rate, self.transmission)
    }

    pub fn with_transmission(self, transmission: f64) -> Result<Self, ModelError> {
        Self::new(self.mean_photons, self.diffusion_rate, transmission)
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn diffusion_rate(&self) -> f64 {
        self.diffusion_rate
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn effective_photons(&self) -> f64 {
        self.mean_photons * self.transmission
    }

    /// Coherent amplitude `α = sqrt(N·T)` reaching the output beam splitter.
    pub fn amplitude(&self) -> f64 {
        sqrt(self.effective_photons())
    }

    /// `Δ = sqrt(1 + 2Nγ)`, the fringe broadening of parity and homodyne
    /// detection.
    pub fn broadening(&self) -> f64 {
        sqrt(1.0 + 2.0 * self.effective_photons() * self.diffusion_rate)
    }

    /// `Δ₀ = sqrt(1 + Nγ)`, the fringe broadening of zero-nonzero counting.
    pub fn zero_broadening(&self) -> f64 {
        sqrt(1.0 + self.effective_photons() * self.diffusion_rate)
    }
}

/// Folds the transmission into the photon number: `N → N·T`, `T → 1`.
pub fn apply_loss(cfg: InterferometerConfig) -> InterferometerConfig {
    InterferometerConfig {
        mean_photons: cfg.effective_photons(),
        diffusion_rate: cfg.diffusion_rate,
        transmission: 1.0,
    }
}
