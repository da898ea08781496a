use core::f64::consts::FRAC_2_PI;

use libm::{cos, exp, lgamma, log, sin, sqrt};

use super::{DetectionScheme, InterferometerConfig, ModelError};

/// Poisson mass allowed beyond the cutoff of a Fock sum.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Quadrature density `P(p|φ) = sqrt(2/π) exp[-2 (p + sqrt(N) sin φ / 2)²]`
/// at output port c. Diffusion is not applied here.
pub fn homodyne_density(cfg: &InterferometerConfig, p: f64, phi: f64) -> f64 {
    let shifted = p + cfg.amplitude() * sin(phi) / 2.0;
    sqrt(FRAC_2_PI) * exp(-2.0 * shifted * shifted)
}

/// Coincidence probability of `n` photons at port c and `m` at port d.
///
/// Evaluated in log space, so large counts neither overflow nor lose the
/// factorials.
pub fn coincidence_prob(cfg: &InterferometerConfig, n: u64, m: u64, phi: f64) -> f64 {
    let total = cfg.effective_photons();
    let s = sin(phi / 2.0);
    let c = cos(phi / 2.0);
    let mut log_p = -total;
    for (count, intensity) in [(n, total * s * s), (m, total * c * c)] {
        if count == 0 {
            continue;
        }
        if intensity == 0.0 {
            return 0.0;
        }
        let k = count as f64;
        log_p += k * log(intensity) - lgamma(k + 1.0);
    }
    exp(log_p)
}

/// Mean photon number at port d, `N cos²(φ/2)`.
pub fn intensity_signal(cfg: &InterferometerConfig, phi: f64) -> f64 {
    let c = cos(phi / 2.0);
    cfg.effective_photons() * c * c
}

/// Chernoff bound on `P(X > cutoff)` for `X ~ Poisson(mean)`.
pub fn poisson_tail_bound(mean: f64, cutoff: u64) -> f64 {
    let k = cutoff as f64 + 1.0;
    if mean <= 0.0 {
        return 0.0;
    }
    if k <= mean {
        return 1.0;
    }
    exp(-mean + k * (1.0 + log(mean / k))).min(1.0)
}

/// A cutoff comfortably past the Poisson bulk: `N + 10 sqrt(N) + 20`.
pub fn recommended_cutoff(mean: f64) -> u64 {
    (mean + 10.0 * sqrt(mean.max(0.0)) + 20.0) as u64
}

/// Result of an explicit Fock-state summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockSum {
    pub probability: f64,
    /// Upper bound on the neglected probability mass.
    pub tail_bound: f64,
}

impl FockSum {
    pub fn is_converged(&self) -> bool {
        self.tail_bound <= TAIL_TOLERANCE
    }
}

/// `P(+|φ)` for the photon-counting schemes by summing coincidence
/// probabilities over `0 <= n, m <= cutoff`: even `n` for parity, `n = 0`
/// for zero-nonzero counting, marginalised over `m`.
///
/// Check [`FockSum::is_converged`]: a cutoff that leaves more than
/// [`TAIL_TOLERANCE`] of Poisson mass behind is flagged, not rejected.
pub fn brute_force_binary(
    cfg: &InterferometerConfig,
    scheme: DetectionScheme,
    phi: f64,
    cutoff: u64,
) -> Result<FockSum, ModelError> {
    let step = match scheme {
        DetectionScheme::Parity => 2,
        DetectionScheme::ZeroNonzero => 0,
        other => return Err(ModelError::UnsupportedScheme(other.name())),
    };
    let mut probability = 0.0;
    let mut n = 0;
    loop {
        let mut row = 0.0;
        for m in 0..=cutoff {
            row += coincidence_prob(cfg, n, m, phi);
        }
        probability += row;
        if step == 0 {
            break;
        }
        n += step;
        if n > cutoff {
            break;
        }
    }
    Ok(FockSum {
        probability,
        tail_bound: poisson_tail_bound(cfg.effective_photons(), cutoff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut sum = f(a) + f(b);
        for i in 1..panels {
            let x = a + i as f64 * h;
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        sum * h / 3.0
    }

    #[test]
    fn density_examples() {
        let cfg = InterferometerConfig::ideal(37.0).unwrap();
        assert!((homodyne_density(&cfg, 0.0, 0.0) - 0.7978845608028654).abs() < 1e-15);
        let cfg = InterferometerConfig::ideal(4.0).unwrap();
        assert!((homodyne_density(&cfg, -1.0, PI / 2.0) - sqrt(FRAC_2_PI)).abs() < 1e-15);
    }

    #[test]
    fn density_is_normalised() {
        for &(n, phi) in &[(1.0, 0.3), (50.0, 0.7), (200.0, 1.2), (1000.0, -2.0)] {
            let cfg = InterferometerConfig::ideal(n).unwrap();
            let centre = -sqrt(n) * sin(phi) / 2.0;
            let total = simpson(
                |p| homodyne_density(&cfg, p, phi),
                centre - 8.0,
                centre + 8.0,
                4000,
            );
            assert!((total - 1.0).abs() < 1e-10, "N {n}: {total}");
        }
    }

    #[test]
    fn coincidence_examples() {
        let cfg = InterferometerConfig::ideal(5.0).unwrap();
        assert_eq!(coincidence_prob(&cfg, 1, 0, 0.0), 0.0);
        assert!((coincidence_prob(&cfg, 0, 2, 0.0) - exp(-5.0) * 12.5).abs() < 1e-15);
        let cfg = InterferometerConfig::ideal(2.0).unwrap();
        assert!((coincidence_prob(&cfg, 1, 1, PI / 2.0) - exp(-2.0)).abs() < 1e-15);
    }

    #[test]
    fn coincidence_large_counts_do_not_overflow() {
        let cfg = InterferometerConfig::ideal(1e4).unwrap();
        let p = coincidence_prob(&cfg, 5000, 5000, PI / 2.0);
        assert!(p.is_finite() && p > 0.0);
    }

    #[test]
    fn coincidence_distribution_sums_to_one() {
        for &(n, phi) in &[(1.0, 0.4), (10.0, 1.0), (30.0, 2.5), (100.0, PI)] {
            let cfg = InterferometerConfig::ideal(n).unwrap();
            let cutoff = recommended_cutoff(n);
            let mut total = 0.0;
            for i in 0..=cutoff {
                for j in 0..=cutoff {
                    total += coincidence_prob(&cfg, i, j, phi);
                }
            }
            assert!((total - 1.0).abs() < 1e-10, "N {n}: {total}");
        }
    }

    #[test]
    fn intensity_examples() {
        let cfg = InterferometerConfig::ideal(10.0).unwrap();
        assert_eq!(intensity_signal(&cfg, 0.0), 10.0);
        assert!(intensity_signal(&cfg, PI).abs() < 1e-14);
        let cfg = InterferometerConfig::ideal(200.0).unwrap();
        assert!((intensity_signal(&cfg, PI / 2.0) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_examples() {
        let cfg = InterferometerConfig::ideal(10.0).unwrap();
        let parity = brute_force_binary(&cfg, DetectionScheme::Parity, PI / 2.0, 80).unwrap();
        assert!(parity.is_converged());
        assert!((parity.probability - 0.5 * (1.0 + exp(-10.0))).abs() < 1e-10);
        let zero = brute_force_binary(&cfg, DetectionScheme::ZeroNonzero, PI, 80).unwrap();
        assert!((zero.probability - exp(-10.0)).abs() < 1e-10);
        for scheme in [DetectionScheme::Parity, DetectionScheme::ZeroNonzero] {
            let at_zero = brute_force_binary(&cfg, scheme, 0.0, 80).unwrap();
            assert!((at_zero.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_flags_short_cutoffs_and_rejects_homodyne() {
        let cfg = InterferometerConfig::ideal(30.0).unwrap();
        let short = brute_force_binary(&cfg, DetectionScheme::Parity, 0.5, 20).unwrap();
        assert!(!short.is_converged());
        assert!(brute_force_binary(&cfg, DetectionScheme::HomodyneZero, 0.5, 80).is_err());
    }

    #[test]
    fn tail_bound_behaviour() {
        assert_eq!(poisson_tail_bound(0.0, 5), 0.0);
        assert_eq!(poisson_tail_bound(50.0, 10), 1.0);
        assert!(poisson_tail_bound(10.0, recommended_cutoff(10.0)) < 1e-12);
    }
}
