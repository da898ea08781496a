//! Monte Carlo harness for the signal-inversion estimator.
//!
//! One repetition draws `ν` binary outcomes at the true phase, takes the
//! frequency `f` of the `+` outcome and solves `P(+|φ̂) = f` on a monotone
//! branch. The spread of `φ̂` over `M` repetitions is compared with the
//! error-propagation prediction `δφ(φ_true)/sqrt(ν)`.
//!
//! The density model [`DetectionScheme::HomodyneZero`] has no samplable
//! outcome; experiments on it run the finite window of half-width
//! [`SAMPLING_WINDOW`] instead, for sampling, inversion and prediction
//! alike.
//!
//! Repetition `r` draws from ChaCha20 seeded with `seed` on stream `r`, so
//! a report depends only on the spec.

use core::f64::consts::{FRAC_PI_2, PI};

use libm::sqrt;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::interferometer::{
    build_model, BinaryModel, DetectionScheme, InterferometerConfig, ModelError,
};
use crate::metrology::{sensitivity, Derivative, MetrologyError};
use crate::specfun::{invert_monotone, Bracket, SpecfunError};

pub const MIN_TRIALS: u64 = 100;
pub const MIN_REPEATS: usize = 10;
/// Runs abort when more than this fraction of inversions fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;
/// Window half-width standing in for the density model.
pub const SAMPLING_WINDOW: f64 = 0.05;
const INVERSION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EstimatorError {
    #[error("at least {MIN_TRIALS} trials per repetition are required, got {0}")]
    TooFewTrials(u64),
    #[error("at least {MIN_REPEATS} repetitions are required, got {0}")]
    TooFewRepeats(usize),
    #[error("true phase {phi} lies outside the inversion branch [{lo}, {hi}]")]
    PhaseOutsideBranch { phi: f64, lo: f64, hi: f64 },
    #[error("branch [{lo}, {hi}] is not a monotone branch of the signal")]
    InvalidBranch { lo: f64, hi: f64 },
    #[error("predicted spread diverges at phi = {0}")]
    DivergentPrediction(f64),
    #[error("{failures} of {repeats} inversions fell outside the branch")]
    TooManyFailures { failures: usize, repeats: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrology(#[from] MetrologyError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

/// Default monotone branch: `[0, π]` for photon counting, `[0, π/2]` for
/// homodyne schemes.
pub fn default_branch(scheme: DetectionScheme) -> Bracket {
    let hi = if scheme.is_homodyne() { FRAC_PI_2 } else { PI };
    Bracket::new(0.0, hi).expect("static branch")
}

/// Scheme whose outcomes are actually drawn.
pub fn sampled_scheme(scheme: DetectionScheme) -> DetectionScheme {
    match scheme {
        DetectionScheme::HomodyneZero => DetectionScheme::HomodyneWindow {
            p0: SAMPLING_WINDOW,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSpec {
    pub cfg: InterferometerConfig,
    pub scheme: DetectionScheme,
    pub phi_true: f64,
    pub trials: u64,
    pub repeats: usize,
    pub seed: u64,
    pub branch: Bracket,
}

impl ExperimentSpec {
    /// Spec on the scheme's [`default_branch`].
    pub fn new(
        cfg: InterferometerConfig,
        scheme: DetectionScheme,
        phi_true: f64,
        trials: u64,
        repeats: usize,
        seed: u64,
    ) -> Result<Self, EstimatorError> {
        Self::with_branch(
            cfg,
            scheme,
            phi_true,
            trials,
            repeats,
            seed,
            default_branch(scheme),
        )
    }

    pub fn with_branch(
        cfg: InterferometerConfig,
        scheme: DetectionScheme,
        phi_true: f64,
        trials: u64,
        repeats: usize,
        seed: u64,
        branch: Bracket,
    ) -> Result<Self, EstimatorError> {
        scheme.validate()?;
        if trials < MIN_TRIALS {
            return Err(EstimatorError::TooFewTrials(trials));
        }
        if repeats < MIN_REPEATS {
            return Err(EstimatorError::TooFewRepeats(repeats));
        }
        let outer = default_branch(scheme);
        if branch.lo() < outer.lo() || branch.hi() > outer.hi() {
            return Err(EstimatorError::InvalidBranch {
                lo: branch.lo(),
                hi: branch.hi(),
            });
        }
        if !branch.contains(phi_true) {
            return Err(EstimatorError::PhaseOutsideBranch {
                phi: phi_true,
                lo: branch.lo(),
                hi: branch.hi(),
            });
        }
        Ok(Self {
            cfg,
            scheme,
            phi_true,
            trials,
            repeats,
            seed,
            branch,
        })
    }

    /// Model used for sampling and inversion.
    pub fn model(&self) -> Result<BinaryModel, EstimatorError> {
        Ok(build_model(&self.cfg, sampled_scheme(self.scheme))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationReport {
    pub spec: ExperimentSpec,
    pub mean_estimate: f64,
    /// Sample standard deviation over successful repetitions.
    pub empirical_std: f64,
    /// `δφ(φ_true) / sqrt(ν)`.
    pub predicted_std: f64,
    /// Repetitions whose frequency fell outside the branch's range.
    pub failures: usize,
    /// `P(+|φ_true)` is exactly 0 or 1.
    pub degenerate: bool,
}

impl EstimationReport {
    pub fn std_ratio(&self) -> f64 {
        self.empirical_std / self.predicted_std
    }
}

/// Uniform deviate on `[0, 1)` with 53 random bits.
fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn repetition_rng(seed: u64, repetition: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(repetition);
    rng
}

/// Fraction of `trials` Bernoulli draws with success probability `p`.
pub fn sample_frequency<R: RngCore>(p: f64, trials: u64, rng: &mut R) -> f64 {
    let mut hits = 0u64;
    for _ in 0..trials {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < p {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Observed `+` frequency of repetition `repetition`.
pub fn sample_outcomes(spec: &ExperimentSpec, repetition: u64) -> Result<f64, EstimatorError> {
    let p = spec.model()?.p_plus(spec.phi_true);
    let mut rng = repetition_rng(spec.seed, repetition);
    Ok(sample_frequency(p, spec.trials, &mut rng))
}

/// Solves `P(+|φ̂) = f` on `branch`; `None` when `f` lies outside the range
/// of `P(+)` over the branch.
pub fn invert_signal(
    model: &BinaryModel,
    f: f64,
    branch: Bracket,
) -> Result<Option<f64>, EstimatorError> {
    match invert_monotone(|phi| model.p_plus(phi), f, branch, INVERSION_TOLERANCE) {
        Ok(phi) => Ok(Some(phi)),
        Err(SpecfunError::TargetOutOfRange { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Runs `M` repetitions of sampling and inversion.
///
/// Statistics are accumulated in repetition order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<EstimationReport, EstimatorError> {
    let model = spec.model()?;
    let point = model.evaluate(spec.phi_true);
    let degenerate = point.p_plus <= 0.0 || point.p_minus <= 0.0;
    let predicted_std =
        sensitivity(&model, spec.phi_true, Derivative::Analytic)? / sqrt(spec.trials as f64);
    if !predicted_std.is_finite() {
        return Err(EstimatorError::DivergentPrediction(spec.phi_true));
    }

    let mut estimates = alloc::vec::Vec::with_capacity(spec.repeats);
    let mut failures = 0usize;
    for repetition in 0..spec.repeats {
        let mut rng = repetition_rng(spec.seed, repetition as u64);
        let mut hits = 0u64;
        for _ in 0..spec.trials {
            if uniform(&mut rng) < point.p_plus {
                hits += 1;
            }
        }
        let f = hits as f64 / spec.trials as f64;
        match invert_signal(&model, f, spec.branch)? {
            Some(phi) => estimates.push(phi),
            None => failures += 1,
        }
    }
    if failures as f64 > MAX_FAILURE_FRACTION * spec.repeats as f64 {
        return Err(EstimatorError::TooManyFailures {
            failures,
            repeats: spec.repeats,
        });
    }

    let count = estimates.len() as f64;
    let mean_estimate = estimates.iter().sum::<f64>() / count;
    let squares: f64 = estimates
        .iter()
        .map(|x| (x - mean_estimate) * (x - mean_estimate))
        .sum();
    let empirical_std = if estimates.len() > 1 {
        sqrt(squares / (count - 1.0))
    } else {
        0.0
    };
    Ok(EstimationReport {
        spec: *spec,
        mean_estimate,
        empirical_std,
        predicted_std,
        failures,
        degenerate,
    })
}
