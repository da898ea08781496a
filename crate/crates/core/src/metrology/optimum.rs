use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use libm::{exp, log};

use super::analytic::{analytic_optimum, homodyne_diffused_sensitivity};
use super::fisher::{information, Information};
use super::MetrologyError;
use crate::interferometer::{build_model, BinaryModel, DetectionScheme, InterferometerConfig};
use crate::specfun::{invert_monotone, minimize_scalar, Bracket};

const OPTIMIZER_TOLERANCE: f64 = 1e-10;
const SCAN_POINTS: usize = 400;
// Geometric scans start no lower than this.
const SCAN_FLOOR: f64 = 1e-6;
// A refined minimum must beat the grid by this relative margin to move the
// optimum away from a smaller phase.
const TIE_MARGIN: f64 = 1e-12;
const FWHM_GRID: usize = 2048;
const FWHM_TOLERANCE: f64 = 1e-12;

/// One row of a sensitivity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub phi: f64,
    pub signal: f64,
    pub p_plus: f64,
    pub delta_phi: f64,
    pub fisher: f64,
}

/// Signal, probability, sensitivity and Fisher information over a phase
/// grid. Rows are sorted by phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityScan {
    pub scheme: DetectionScheme,
    pub effective_photons: f64,
    pub diffusion_rate: f64,
    pub rows: Vec<ScanRow>,
}

impl SensitivityScan {
    /// Row with the smallest finite sensitivity; ties go to the first row.
    pub fn best_row(&self) -> Option<&ScanRow> {
        self.rows.iter().filter(|r| r.delta_phi.is_finite()).fold(
            None,
            |best: Option<&ScanRow>, r| match best {
                Some(b) if b.delta_phi <= r.delta_phi => Some(b),
                _ => Some(r),
            },
        )
    }
}

/// Evenly spaced grid of `points` phases from `start` to `end` inclusive.
pub fn phase_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>, MetrologyError> {
    if !(start.is_finite() && end.is_finite() && start < end) || points < 2 {
        return Err(MetrologyError::InvalidGrid);
    }
    // Symmetric ranges give exactly mirrored grids.
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| (start * (last - i as f64) + end * i as f64) / last)
        .collect())
}

pub fn scan(
    cfg: &InterferometerConfig,
    scheme: DetectionScheme,
    grid: &[f64],
) -> Result<SensitivityScan, MetrologyError> {
    scan_model(&build_model(cfg, scheme)?, grid)
}

/// Requires a nonempty grid sorted in increasing order.
pub fn scan_model(model: &BinaryModel, grid: &[f64]) -> Result<SensitivityScan, MetrologyError> {
    if grid.is_empty()
        || grid.windows(2).any(|w| !(w[0] < w[1]))
        || grid.iter().any(|x| !x.is_finite())
    {
        return Err(MetrologyError::InvalidGrid);
    }
    let (up, down) = model.outcome_values();
    let rows = grid
        .iter()
        .map(|&phi| {
            let point = model.evaluate(phi);
            let Information {
                fisher, delta_phi, ..
            } = information(point, model.fisher_limit(phi));
            ScanRow {
                phi,
                signal: up * point.p_plus + down * point.p_minus,
                p_plus: point.p_plus,
                delta_phi,
                fisher,
            }
        })
        .collect();
    Ok(SensitivityScan {
        scheme: model.scheme(),
        effective_photons: model.effective_photons(),
        diffusion_rate: model.diffusion_rate(),
        rows,
    })
}

/// Full width at half maximum of the signal around the peak at `peak_phi`.
///
/// The baseline is the minimum of the exact signal over `[0, π]`. Each
/// half-maximum crossing is the first one met scanning outward from the
/// peak, refined by bracketed inversion.
pub fn fwhm(model: &BinaryModel, peak_phi: f64) -> Result<f64, MetrologyError> {
    let signal = |phi: f64| model.signal(phi);
    let peak = signal(peak_phi);
    let baseline = baseline(&signal)?;
    let half = 0.5 * (peak + baseline);
    if !(peak - baseline > 1e-12 * peak.abs().max(1.0)) {
        return Err(MetrologyError::NoHalfMaximum);
    }
    let right = crossing(&signal, peak_phi, 1.0, half)?;
    let left = crossing(&signal, peak_phi, -1.0, half)?;
    Ok(right - left)
}

fn baseline(signal: &impl Fn(f64) -> f64) -> Result<f64, MetrologyError> {
    let step = PI / FWHM_GRID as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=FWHM_GRID {
        let v = signal(i as f64 * step);
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo = (best.0.saturating_sub(1)) as f64 * step;
    let hi = ((best.0 + 1).min(FWHM_GRID)) as f64 * step;
    let refined = minimize_scalar(signal, Bracket::new(lo, hi)?, FWHM_TOLERANCE)?;
    Ok(refined.value.min(best.1))
}

fn crossing(
    signal: &impl Fn(f64) -> f64,
    peak_phi: f64,
    direction: f64,
    half: f64,
) -> Result<f64, MetrologyError> {
    let step = PI / FWHM_GRID as f64;
    let mut previous = peak_phi;
    for i in 1..=FWHM_GRID {
        let phi = peak_phi + direction * i as f64 * step;
        if signal(phi) <= half {
            let (lo, hi) = if direction > 0.0 {
                (previous, phi)
            } else {
                (phi, previous)
            };
            return Ok(invert_monotone(
                signal,
                half,
                Bracket::new(lo, hi)?,
                FWHM_TOLERANCE,
            )?);
        }
        previous = phi;
    }
    Err(MetrologyError::NoHalfMaximum)
}

/// Exact and closed-form best sensitivity of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumReport {
    pub scheme: DetectionScheme,
    pub effective_photons: f64,
    pub diffusion_rate: f64,
    pub phi_min: f64,
    pub delta_phi_min: f64,
    pub analytic_phi_min: Option<f64>,
    pub analytic_delta_phi_min: Option<f64>,
    pub series_delta_phi_min: Option<f64>,
    /// Exact fringe width; `None` when the signal has no half-maximum
    /// crossing.
    pub fwhm: Option<f64>,
}

/// Search interval: `[0, 1]` without diffusion, `[1e-4, 1]` with it.
pub fn default_bracket(gamma: f64) -> Bracket {
    let lo = if gamma > 0.0 { 1e-4 } else { 0.0 };
    Bracket::new(lo, 1.0).expect("static bracket")
}

pub fn best_sensitivity(
    cfg: &InterferometerConfig,
    scheme: DetectionScheme,
    bracket: Option<Bracket>,
) -> Result<OptimumReport, MetrologyError> {
    optimize_model(&build_model(cfg, scheme)?, bracket)
}

/// Finite-window homodyne optimum; no closed form is reported.
pub fn window_best_sensitivity(
    cfg: &InterferometerConfig,
    p0: f64,
) -> Result<OptimumReport, MetrologyError> {
    best_sensitivity(cfg, DetectionScheme::window(p0)?, None)
}

/// Minimises the exact sensitivity over `bracket` (default
/// [`default_bracket`]), which must lie within `[0, π/2]`.
///
/// A geometric scan locates the first global grid minimum; Brent's method
/// refines it within the neighbouring cells.
pub fn optimize_model(
    model: &BinaryModel,
    bracket: Option<Bracket>,
) -> Result<OptimumReport, MetrologyError> {
    let gamma = model.diffusion_rate();
    let bracket = bracket.unwrap_or_else(|| default_bracket(gamma));
    if bracket.lo() < 0.0 || bracket.hi() > FRAC_PI_2 {
        return Err(MetrologyError::BracketOutOfRange {
            lo: bracket.lo(),
            hi: bracket.hi(),
        });
    }
    let delta = |phi: f64| information(model.evaluate(phi), model.fisher_limit(phi)).delta_phi;

    let grid = search_grid(bracket);
    let mut best = (0usize, f64::INFINITY);
    for (i, &phi) in grid.iter().enumerate() {
        let v = delta(phi);
        if v < best.1 {
            best = (i, v);
        }
    }
    if !best.1.is_finite() {
        return Err(MetrologyError::NoFiniteSensitivity);
    }
    let (mut phi_min, mut delta_min) = (grid[best.0], best.1);
    let lo = grid[best.0.saturating_sub(1)];
    let hi = grid[(best.0 + 1).min(grid.len() - 1)];
    if lo < hi {
        let refined = minimize_scalar(delta, Bracket::new(lo, hi)?, OPTIMIZER_TOLERANCE)?;
        let improves = refined.value < delta_min * (1.0 - TIE_MARGIN);
        let ties_lower = refined.value <= delta_min && refined.x < phi_min;
        if improves || ties_lower {
            phi_min = refined.x;
            delta_min = refined.value;
        }
    }

    let n = model.effective_photons();
    let analytic = analytic_optimum(model.scheme(), n, gamma)?;
    Ok(OptimumReport {
        scheme: model.scheme(),
        effective_photons: n,
        diffusion_rate: gamma,
        phi_min,
        delta_phi_min: delta_min,
        analytic_phi_min: analytic.map(|a| a.phi_min),
        analytic_delta_phi_min: analytic.map(|a| a.delta_phi_min),
        series_delta_phi_min: analytic.map(|a| a.series),
        fwhm: match fwhm(model, 0.0) {
            Ok(width) => Some(width),
            Err(MetrologyError::NoHalfMaximum) => None,
            Err(e) => return Err(e),
        },
    })
}

fn search_grid(bracket: Bracket) -> Vec<f64> {
    let first = bracket.lo().max(SCAN_FLOOR).min(bracket.hi());
    let ratio = log(bracket.hi() / first) / (SCAN_POINTS - 1) as f64;
    let mut grid = Vec::with_capacity(SCAN_POINTS + 1);
    if bracket.lo() < first {
        grid.push(bracket.lo());
    }
    for i in 0..SCAN_POINTS {
        grid.push(if i == SCAN_POINTS - 1 {
            bracket.hi()
        } else {
            first * exp(ratio * i as f64)
        });
    }
    grid
}

/// Exact sensitivity against its small-phase closed form at one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximationPoint {
    pub phi: f64,
    pub exact: f64,
    pub approximate: f64,
    pub relative_deviation: f64,
    /// Relative deviation above [`APPROXIMATION_FLAG`].
    pub flagged: bool,
}

pub const APPROXIMATION_FLAG: f64 = 0.1;

/// Compares a diffused density-homodyne model with its small-phase
/// sensitivity formula over `grid`.
pub fn homodyne_approximation(
    model: &BinaryModel,
    grid: &[f64],
) -> Result<Vec<ApproximationPoint>, MetrologyError> {
    if model.scheme() != DetectionScheme::HomodyneZero {
        return Err(MetrologyError::Model(
            crate::interferometer::ModelError::UnsupportedScheme(model.scheme().name()),
        ));
    }
    let (n, gamma) = (model.effective_photons(), model.diffusion_rate());
    Ok(grid
        .iter()
        .map(|&phi| {
            let exact = information(model.evaluate(phi), None).delta_phi;
            let approximate = homodyne_diffused_sensitivity(n, gamma, phi);
            let relative_deviation = ((approximate - exact) / exact).abs();
            ApproximationPoint {
                phi,
                exact,
                approximate,
                relative_deviation,
                flagged: !(relative_deviation <= APPROXIMATION_FLAG),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::analytic::shot_noise;
    use libm::sqrt;
    use proptest::prelude::*;

    fn cfg(n: f64, gamma: f64) -> InterferometerConfig {
        InterferometerConfig::new(n, gamma, 1.0).unwrap()
    }

    // Dense uniform scan, independent of the geometric search.
    fn grid_oracle(
        cfg: &InterferometerConfig,
        scheme: DetectionScheme,
        lo: f64,
        hi: f64,
    ) -> (f64, f64) {
        let model = build_model(cfg, scheme).unwrap();
        let grid = phase_grid(lo, hi, 20001).unwrap();
        let s = scan_model(&model, &grid).unwrap();
        let r = s.best_row().unwrap();
        (r.phi, r.delta_phi)
    }

    #[test]
    fn parity_scan_reaches_shot_noise_at_origin() {
        let grid = phase_grid(-PI / 4.0, PI / 4.0, 401).unwrap();
        let s = scan(&cfg(200.0, 0.0), DetectionScheme::Parity, &grid).unwrap();
        let best = s.best_row().unwrap();
        assert_eq!(best.phi, 0.0);
        assert!((best.delta_phi - 0.0707107).abs() < 1e-7);
    }

    #[test]
    fn diffused_scan_diverges_at_origin() {
        let grid = phase_grid(-0.5, 0.5, 201).unwrap();
        let s = scan(&cfg(200.0, 1e-4), DetectionScheme::Parity, &grid).unwrap();
        assert_eq!(s.rows[100].phi, 0.0);
        assert_eq!(s.rows[100].delta_phi, f64::INFINITY);
        assert_eq!(s.rows[100].fisher, 0.0);
        assert!(s.best_row().unwrap().phi != 0.0);
    }

    #[test]
    fn scan_rows_are_consistent_and_even() {
        let grid = phase_grid(-1.0, 1.0, 101).unwrap();
        for scheme in [
            DetectionScheme::HomodyneZero,
            DetectionScheme::Parity,
            DetectionScheme::ZeroNonzero,
        ] {
            let s = scan(&cfg(200.0, 0.0), scheme, &grid).unwrap();
            for (row, mirror) in s.rows.iter().zip(s.rows.iter().rev()) {
                if row.fisher > 0.0 && row.delta_phi.is_finite() {
                    assert!((row.delta_phi * sqrt(row.fisher) - 1.0).abs() < 1e-6);
                } else {
                    assert_eq!(row.delta_phi, f64::INFINITY);
                }
                assert!((row.p_plus - mirror.p_plus).abs() < 1e-12);
                let (a, b) = (row.delta_phi, mirror.delta_phi);
                assert!(
                    a == b || ((a - b) / a).abs() < 1e-9,
                    "{scheme} {} {a} {b}",
                    row.phi
                );
            }
        }
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let c = cfg(10.0, 0.0);
        assert!(scan(&c, DetectionScheme::Parity, &[]).is_err());
        assert!(scan(&c, DetectionScheme::Parity, &[0.2, 0.1]).is_err());
        assert!(phase_grid(0.5, 0.5, 10).is_err());
        assert!(phase_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn fwhm_examples() {
        let parity = build_model(&cfg(200.0, 0.0), DetectionScheme::Parity).unwrap();
        let w = fwhm(&parity, 0.0).unwrap();
        assert!((w / 0.1665108 - 1.0).abs() < 0.02);
        let z = build_model(&cfg(200.0, 0.0), DetectionScheme::ZeroNonzero).unwrap();
        let w = fwhm(&z, 0.0).unwrap();
        assert!((w / 0.2354821 - 1.0).abs() < 0.02);
        let diffused = build_model(&cfg(200.0, 1e-4), DetectionScheme::Parity).unwrap();
        let w = fwhm(&diffused, 0.0).unwrap();
        assert!((w / (sqrt(1.04) * 0.1665108) - 1.0).abs() < 0.02);
    }

    #[test]
    fn fwhm_half_maximum_is_exact() {
        let m = build_model(&cfg(50.0, 1e-3), DetectionScheme::HomodyneZero).unwrap();
        let w = fwhm(&m, 0.0).unwrap();
        let base = (0..=4096)
            .map(|i| m.signal(i as f64 * PI / 4096.0))
            .fold(f64::INFINITY, f64::min);
        let half = 0.5 * (m.signal(0.0) + base);
        assert!((m.signal(w / 2.0) - half).abs() < 1e-9);
    }

    #[test]
    fn fwhm_of_flat_signal_fails() {
        let m = build_model(&cfg(0.0, 0.0), DetectionScheme::Parity).unwrap();
        assert!(matches!(fwhm(&m, 0.0), Err(MetrologyError::NoHalfMaximum)));
    }

    #[test]
    fn homodyne_benchmark_at_200() {
        let r = best_sensitivity(&cfg(200.0, 0.0), DetectionScheme::HomodyneZero, None).unwrap();
        assert!((r.delta_phi_min - 0.0728).abs() < 5e-4);
        let eta = super::super::analytic::homodyne_eta();
        assert!((r.analytic_delta_phi_min.unwrap() - eta / sqrt(200.0)).abs() < 1e-15);
        let (phi, value) = grid_oracle(&cfg(200.0, 0.0), DetectionScheme::HomodyneZero, 1e-3, 0.5);
        assert!((r.delta_phi_min - value).abs() <= 1e-6 * value);
        assert!((r.phi_min - phi).abs() < 1e-3);
        assert!(r.delta_phi_min <= value);
    }

    #[test]
    fn noiseless_counting_optimum_is_at_origin() {
        for &n in &[50.0, 200.0, 1000.0] {
            for scheme in [DetectionScheme::Parity, DetectionScheme::ZeroNonzero] {
                let r = best_sensitivity(&cfg(n, 0.0), scheme, None).unwrap();
                assert_eq!(r.phi_min, 0.0);
                assert!((r.delta_phi_min / shot_noise(n) - 1.0).abs() < 1e-12);
                assert!((r.analytic_delta_phi_min.unwrap() / shot_noise(n) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diffused_counting_optima_match_series_and_oracle() {
        let c = cfg(200.0, 1e-4);
        let p = best_sensitivity(&c, DetectionScheme::Parity, None).unwrap();
        let z = best_sensitivity(&c, DetectionScheme::ZeroNonzero, None).unwrap();
        assert!(z.delta_phi_min < p.delta_phi_min);
        assert!(p.phi_min > 0.0 && z.phi_min > 0.0);
        for (r, scheme) in [
            (p, DetectionScheme::Parity),
            (z, DetectionScheme::ZeroNonzero),
        ] {
            let (_, oracle) = grid_oracle(&c, scheme, 1e-4, 0.5);
            assert!((r.delta_phi_min / oracle - 1.0).abs() < 1e-6);
            assert!((r.series_delta_phi_min.unwrap() / r.delta_phi_min - 1.0).abs() < 0.05);
            assert!((r.analytic_delta_phi_min.unwrap() / r.delta_phi_min - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn closed_form_optimum_phases_track_the_search() {
        for n in [1e3, 1e4, 1e5] {
            for scheme in [DetectionScheme::Parity, DetectionScheme::ZeroNonzero] {
                let r = best_sensitivity(&cfg(n, 1e-2), scheme, None).unwrap();
                let a = r.analytic_phi_min.unwrap();
                assert!((a / r.phi_min - 1.0).abs() < 1e-4, "{scheme} N={n}");
            }
        }
    }

    #[test]
    fn window_benchmark() {
        let r = window_best_sensitivity(&cfg(200.0, 0.0), 0.5).unwrap();
        assert!((r.delta_phi_min * sqrt(200.0) / 1.37 - 1.0).abs() < 0.05);
        assert_eq!(r.analytic_delta_phi_min, None);
        assert!(r.fwhm.unwrap() > 0.0);
    }

    #[test]
    fn narrow_window_rescales_to_unit_complement() {
        // As p0 → 0, sqrt(2 p0) δφ_window → sqrt(D)/|D'| with D the density.
        let n = 200.0;
        let c = cfg(n, 0.0);
        let limit = (1..200000)
            .map(|i| {
                let phi = i as f64 * 1e-6;
                let d = sqrt(2.0 / PI) * exp(-0.5 * n * libm::sin(phi) * libm::sin(phi));
                1.0 / (n * (libm::sin(phi) * libm::cos(phi)).abs() * sqrt(d))
            })
            .fold(f64::INFINITY, f64::min);
        let mut previous = f64::INFINITY;
        for &p0 in &[1e-2, 1e-3, 1e-4] {
            let r = window_best_sensitivity(&c, p0).unwrap();
            let gap = (r.delta_phi_min * sqrt(2.0 * p0) / limit - 1.0).abs();
            assert!(gap < previous);
            previous = gap;
        }
        assert!(previous < 1e-4);
        let density = best_sensitivity(&c, DetectionScheme::HomodyneZero, None).unwrap();
        assert!(limit > density.delta_phi_min);
    }

    #[test]
    fn full_window_is_uninformative() {
        let r = window_best_sensitivity(&cfg(200.0, 0.0), 10.0);
        assert!(matches!(r, Err(MetrologyError::NoFiniteSensitivity)));
    }

    #[test]
    fn rejects_bracket_outside_first_quadrant() {
        let b = Bracket::new(0.1, 2.0).unwrap();
        assert!(best_sensitivity(&cfg(50.0, 0.0), DetectionScheme::Parity, Some(b)).is_err());
    }

    #[test]
    fn optimum_degrades_with_diffusion() {
        for scheme in [
            DetectionScheme::HomodyneZero,
            DetectionScheme::Parity,
            DetectionScheme::ZeroNonzero,
        ] {
            let mut previous = 0.0;
            for &gamma in &[0.0, 1e-5, 1e-4, 1e-3, 1e-2] {
                let r = best_sensitivity(&cfg(200.0, gamma), scheme, None).unwrap();
                assert!(r.delta_phi_min >= previous, "{scheme} {gamma}");
                previous = r.delta_phi_min;
            }
        }
    }

    #[test]
    fn resolution_scaling_flattens_with_photons() {
        let mut previous = 0.0;
        for &n in &[10.0, 100.0, 1000.0, 1e4] {
            let m = build_model(&cfg(n, 1e-2), DetectionScheme::Parity).unwrap();
            let scaled = fwhm(&m, 0.0).unwrap() * sqrt(n);
            assert!(scaled >= previous);
            previous = scaled;
        }
    }

    #[test]
    fn homodyne_approximation_near_optimum() {
        let m = build_model(&cfg(200.0, 1e-4), DetectionScheme::HomodyneZero).unwrap();
        let r = optimize_model(&m, None).unwrap();
        let points = homodyne_approximation(&m, &[r.phi_min, 1.2]).unwrap();
        assert!(!points[0].flagged);
        assert!(points[1].flagged);
        assert!(homodyne_approximation(
            &build_model(&cfg(10.0, 0.0), DetectionScheme::Parity).unwrap(),
            &[0.1]
        )
        .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn z_beats_parity(log_n in 1.0f64..3.0, log_ng in -4.0f64..0.0) {
            let n = libm::pow(10.0, log_n);
            let gamma = libm::pow(10.0, log_ng) / n;
            let c = cfg(n, gamma);
            let p = best_sensitivity(&c, DetectionScheme::Parity, None).unwrap();
            let z = best_sensitivity(&c, DetectionScheme::ZeroNonzero, None).unwrap();
            prop_assert!(z.delta_phi_min <= p.delta_phi_min);
        }

        #[test]
        fn report_invariants(which in 0usize..3, log_n in 1.0f64..3.0, g in 0usize..3) {
            let scheme = [DetectionScheme::HomodyneZero, DetectionScheme::Parity, DetectionScheme::ZeroNonzero][which];
            let gamma = [0.0, 1e-4, 1e-3][g];
            let r = best_sensitivity(&cfg(libm::pow(10.0, log_n), gamma), scheme, None).unwrap();
            prop_assert!(r.delta_phi_min > 0.0);
            prop_assert!(default_bracket(gamma).contains(r.phi_min));
            prop_assert!(r.fwhm.unwrap() > 0.0);
        }
    }
}
