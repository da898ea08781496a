//! The four commands. Each builds a [`Table`], runs the `--check` suite if
//! requested and returns the table with any violations; [`run`] writes it.

use mzi_core::estimator::{run_experiment, sampled_scheme, EstimatorError, ExperimentSpec};
use mzi_core::interferometer::{build_model_with_order, BinaryModel, ModelError};
use mzi_core::metrology::analytic::{analytic_fwhm, shot_noise};
use mzi_core::metrology::{
    crb_saturation_check, default_bracket, fwhm, optimize_model, scan_model, Derivative,
    MetrologyError, DEFAULT_STEP,
};
use mzi_core::{DetectionScheme, InterferometerConfig};

use crate::args::{Cli, Command, EstimateArgs, ScanArgs, SweepArgs};
use crate::config::{quad_order, Settings};
use crate::output::{emit, Cell, Table};
use crate::{CliError, ExitKind};

const SCAN_DEFAULT: (f64, f64, usize) = (-1.0, 1.0, 401);
const ESTIMATE_TRIALS: u64 = 10_000;
const ESTIMATE_REPEATS: usize = 400;
// Finite-difference saturation checks only use points with a slope this
// steep; flatter points are below the differencing resolution.
const RESOLVED_SLOPE: f64 = 1e-3;

/// Result of a command that produced output.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Invariant violations found by `--check`.
    pub violations: Vec<String>,
    /// Nonzero status despite complete output, e.g. a missing fringe
    /// crossing.
    pub status: ExitKind,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self {
            table,
            violations: Vec::new(),
            status: ExitKind::Success,
        }
    }

    pub fn exit_kind(&self) -> ExitKind {
        if self.status != ExitKind::Success {
            self.status
        } else if !self.violations.is_empty() {
            ExitKind::CheckFailed
        } else {
            ExitKind::Success
        }
    }
}

/// Runs `cli` and writes its output.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (outcome, settings) = match &cli.command {
        Command::Scan(args) => scan(args)?,
        Command::Best(args) => best(args)?,
        Command::Fwhm(args) => fringe_width(args)?,
        Command::Estimate(args) => estimate(args)?,
    };
    let text = outcome.table.render(settings.format()?)?;
    emit(settings.output().as_deref(), &text)?;
    Ok(outcome)
}

fn model_error(e: ModelError) -> CliError {
    CliError::config(e.to_string())
}

fn build(cfg: &InterferometerConfig, scheme: DetectionScheme) -> Result<BinaryModel, CliError> {
    build_model_with_order(cfg, scheme, quad_order()?).map_err(model_error)
}

fn scenario_meta(table: &mut Table, cfg: &InterferometerConfig) {
    table.meta.push(("gamma", Cell::Real(cfg.diffusion_rate())));
    table
        .meta
        .push(("transmission", Cell::Real(cfg.transmission())));
}

fn scheme_meta(table: &mut Table, scheme: DetectionScheme) {
    table
        .meta
        .push(("scheme", Cell::Text(scheme.name().into())));
    let p0 = match scheme {
        DetectionScheme::HomodyneWindow { p0 } => Some(p0),
        _ => None,
    };
    table.meta.push(("p0", p0.into()));
}

pub fn scan(args: &ScanArgs) -> Result<(Outcome, Settings), CliError> {
    let settings = Settings::resolve(&args.common, &[("phi", args.phi.clone())])?;
    let scheme = settings.scheme()?;
    let cfg = settings.scenario(settings.photons()?)?;
    let unit = settings.phase_unit()?;
    let grid = settings.grid(SCAN_DEFAULT)?;
    let model = build(&cfg, scheme)?;
    let result = scan_model(&model, &grid).map_err(|e| CliError::config(e.to_string()))?;

    let mut table = Table::new(
        "scan",
        vec!["phi", "signal", "p_plus", "delta_phi", "fisher"],
    );
    scheme_meta(&mut table, scheme);
    table.meta.push(("photons", Cell::Real(cfg.mean_photons())));
    scenario_meta(&mut table, &cfg);
    table.meta.push((
        "phase_unit",
        Cell::Text(if unit == 1.0 { "rad" } else { "pi" }.into()),
    ));
    for row in &result.rows {
        table.push(vec![
            Cell::Real(row.phi / unit),
            Cell::Real(row.signal),
            Cell::Real(row.p_plus),
            Cell::Real(row.delta_phi),
            Cell::Real(row.fisher),
        ]);
    }
    let mut outcome = Outcome::new(table);
    if settings.check()? {
        outcome.violations = check_scan(&model, &result)?;
    }
    Ok((outcome, settings))
}

fn check_scan(
    model: &BinaryModel,
    scan: &mzi_core::SensitivityScan,
) -> Result<Vec<String>, CliError> {
    let mut violations = Vec::new();
    let upper = if model.is_density() {
        (2.0 / std::f64::consts::PI).sqrt()
    } else {
        1.0
    };
    for row in &scan.rows {
        if row.fisher > 0.0 && row.delta_phi.is_finite() {
            let v = (row.delta_phi * row.fisher.sqrt() - 1.0).abs();
            if v > 1e-6 {
                violations.push(format!(
                    "phi {}: delta_phi * sqrt(fisher) - 1 = {v:e}",
                    row.phi
                ));
            }
        } else if row.delta_phi != f64::INFINITY {
            violations.push(format!(
                "phi {}: zero fisher with finite delta_phi",
                row.phi
            ));
        }
        if !(0.0..=upper).contains(&row.p_plus) {
            violations.push(format!(
                "phi {}: p_plus {} out of range",
                row.phi, row.p_plus
            ));
        }
        if (model.p_plus(-row.phi) - row.p_plus).abs() > 1e-12 {
            violations.push(format!("phi {}: signal not even", row.phi));
        }
    }
    let resolved: Vec<f64> = scan
        .rows
        .iter()
        .map(|r| r.phi)
        .filter(|&phi| model.slope(phi).abs() >= RESOLVED_SLOPE)
        .collect();
    let worst = crb_saturation_check(model, &resolved, Derivative::Central(DEFAULT_STEP))
        .map_err(|e| CliError::config(e.to_string()))?;
    if worst > 1e-6 {
        violations.push(format!(
            "finite-difference saturation check: max violation {worst:e}"
        ));
    }
    Ok(violations)
}

pub fn best(args: &SweepArgs) -> Result<(Outcome, Settings), CliError> {
    let settings = sweep_settings(args)?;
    let schemes = settings.schemes()?;
    let sweep = settings.photon_sweep()?;
    let unit = settings.phase_unit()?;
    let bracket = settings.bracket()?;
    if let Some(b) = bracket {
        if b.lo() < 0.0 || b.hi() > std::f64::consts::FRAC_PI_2 {
            return Err(CliError::config(format!(
                "bracket [{}, {}] leaves [0, pi/2]",
                b.lo(),
                b.hi()
            )));
        }
    }
    let base = settings.scenario(sweep[0])?;

    let mut table = Table::new(
        "best",
        vec![
            "scheme",
            "N",
            "phi_min",
            "delta_phi_min_exact",
            "delta_phi_min_analytic",
            "delta_phi_min_series",
            "shot_noise",
            "status",
        ],
    );
    scenario_meta(&mut table, &base);
    table.meta.push((
        "phase_unit",
        Cell::Text(if unit == 1.0 { "rad" } else { "pi" }.into()),
    ));
    let check = settings.check()?;
    let mut violations = Vec::new();
    let mut minima: Vec<(DetectionScheme, f64, f64)> = Vec::new();
    for &scheme in &schemes {
        for &n in &sweep {
            let cfg = settings.scenario(n)?;
            let result = build(&cfg, scheme).and_then(|model| {
                optimize_model(&model, bracket).map_err(|e| CliError::config(e.to_string()))
            });
            let name = Cell::Text(scheme.name().into());
            let noise = Cell::Real(shot_noise(cfg.effective_photons()));
            match result {
                Ok(r) => {
                    table.push(vec![
                        name,
                        Cell::Real(n),
                        Cell::Real(r.phi_min / unit),
                        Cell::Real(r.delta_phi_min),
                        r.analytic_delta_phi_min.into(),
                        r.series_delta_phi_min.into(),
                        noise,
                        Cell::Text("ok".into()),
                    ]);
                    minima.push((scheme, n, r.delta_phi_min));
                    if check {
                        let b = bracket.unwrap_or_else(|| default_bracket(cfg.diffusion_rate()));
                        if !(r.delta_phi_min > 0.0)
                            || !b.contains(r.phi_min)
                            || r.fwhm.is_some_and(|w| !(w > 0.0))
                        {
                            violations.push(format!("{scheme} N={n}: report invariants violated"));
                        }
                        let counting = matches!(
                            scheme,
                            DetectionScheme::Parity | DetectionScheme::ZeroNonzero
                        );
                        if counting && cfg.diffusion_rate() == 0.0 {
                            let scaled = r.delta_phi_min * cfg.effective_photons().sqrt();
                            if (scaled - 1.0).abs() > 1e-3 {
                                violations.push(format!(
                                    "{scheme} N={n}: noiseless optimum {scaled} * shot noise"
                                ));
                            }
                        }
                    }
                }
                Err(e) => table.push(vec![
                    name,
                    Cell::Real(n),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    noise,
                    Cell::Text(e.message),
                ]),
            }
        }
    }
    if check {
        let gamma = base.diffusion_rate();
        for &(scheme, n, z) in &minima {
            if scheme != DetectionScheme::ZeroNonzero || n * gamma > 1.0 {
                continue;
            }
            if let Some(&(_, _, p)) = minima
                .iter()
                .find(|m| m.0 == DetectionScheme::Parity && m.1 == n)
            {
                if z > p * (1.0 + 1e-12) {
                    violations.push(format!("N={n}: zero-nonzero optimum {z} above parity {p}"));
                }
            }
        }
    }
    let mut outcome = Outcome::new(table);
    outcome.violations = violations;
    Ok((outcome, settings))
}

fn sweep_settings(args: &SweepArgs) -> Result<Settings, CliError> {
    Settings::resolve(
        &args.common,
        &[
            ("n", args.n.clone()),
            ("n_log", args.n_log.clone()),
            ("bracket", args.bracket.clone()),
        ],
    )
}

pub fn fringe_width(args: &SweepArgs) -> Result<(Outcome, Settings), CliError> {
    let settings = sweep_settings(args)?;
    let scheme = settings.scheme()?;
    let sweep = settings.photon_sweep()?;
    let base = settings.scenario(sweep[0])?;
    let mut table = Table::new("fwhm", vec!["N", "gamma", "fwhm_exact", "fwhm_analytic"]);
    scheme_meta(&mut table, scheme);
    table
        .meta
        .push(("transmission", Cell::Real(base.transmission())));
    let check = settings.check()?;
    let mut violations = Vec::new();
    let mut missing = Vec::new();
    let mut previous: Option<f64> = None;
    for &n in &sweep {
        let cfg = settings.scenario(n)?;
        let model = build(&cfg, scheme)?;
        let analytic = analytic_fwhm(scheme, cfg.effective_photons(), cfg.diffusion_rate())
            .filter(|w| w.is_finite());
        let exact = match fwhm(&model, 0.0) {
            Ok(w) => Some(w),
            Err(MetrologyError::NoHalfMaximum) => {
                missing.push(n);
                None
            }
            Err(e) => return Err(CliError::config(e.to_string())),
        };
        table.push(vec![
            Cell::Real(n),
            Cell::Real(cfg.diffusion_rate()),
            exact.into(),
            analytic.into(),
        ]);
        if let (true, Some(w)) = (check, exact) {
            violations.extend(check_width(&model, n, w));
            let scaled = w * cfg.effective_photons().sqrt();
            if cfg.diffusion_rate() > 0.0 {
                if let Some(p) = previous.filter(|&p| scaled < p * (1.0 - 1e-9)) {
                    violations.push(format!("N={n}: FWHM*sqrt(N) fell from {p} to {scaled}"));
                }
            }
            previous = Some(scaled);
        }
    }
    let mut outcome = Outcome::new(table);
    outcome.violations = violations;
    if !missing.is_empty() {
        outcome.status = ExitKind::NoCrossing;
        outcome
            .violations
            .push(format!("no half-maximum crossing for N = {missing:?}"));
    }
    Ok((outcome, settings))
}

fn check_width(model: &BinaryModel, n: f64, width: f64) -> Vec<String> {
    let mut violations = Vec::new();
    if !(width > 0.0) {
        violations.push(format!("N={n}: nonpositive width {width}"));
    }
    let left = model.signal(-width / 2.0);
    let right = model.signal(width / 2.0);
    if (left - right).abs() > 1e-9 {
        violations.push(format!("N={n}: half-maximum points not symmetric"));
    }
    if !(right < model.signal(0.0)) {
        violations.push(format!("N={n}: half-maximum point not below the peak"));
    }
    violations
}

pub fn estimate(args: &EstimateArgs) -> Result<(Outcome, Settings), CliError> {
    let settings = Settings::resolve(
        &args.common,
        &[
            ("phi_true", args.phi_true.map(|v| v.to_string())),
            ("trials", args.trials.map(|v| v.to_string())),
            ("repeats", args.repeats.map(|v| v.to_string())),
            ("seed", args.seed.map(|v| v.to_string())),
        ],
    )?;
    let scheme = settings.scheme()?;
    let cfg = settings.scenario(settings.photons()?)?;
    let unit = settings.phase_unit()?;
    let phi_true = settings
        .real("phi_true")?
        .ok_or_else(|| CliError::config("--phi-true is required"))?
        * unit;
    let trials = settings.integer("trials")?.unwrap_or(ESTIMATE_TRIALS);
    let repeats = settings.integer("repeats")?.unwrap_or(ESTIMATE_REPEATS);
    let seed = settings.integer("seed")?.unwrap_or(0);
    let spec = ExperimentSpec::new(cfg, scheme, phi_true, trials, repeats, seed)
        .map_err(estimator_error)?;
    let report = run_experiment(&spec).map_err(estimator_error)?;

    let mut table = Table::new("estimate", Vec::new());
    scheme_meta(&mut table, scheme);
    table.meta.push((
        "sampled_scheme",
        Cell::Text(sampled_scheme(scheme).name().into()),
    ));
    table.meta.push(("photons", Cell::Real(cfg.mean_photons())));
    scenario_meta(&mut table, &cfg);
    table.meta.push(("phi_true", Cell::Real(phi_true / unit)));
    table.meta.push(("trials", Cell::Integer(trials)));
    table.meta.push(("repeats", Cell::Integer(repeats as u64)));
    table.meta.push(("seed", Cell::Integer(seed)));
    table
        .meta
        .push(("mean_estimate", Cell::Real(report.mean_estimate / unit)));
    table
        .meta
        .push(("empirical_std", Cell::Real(report.empirical_std / unit)));
    table
        .meta
        .push(("predicted_std", Cell::Real(report.predicted_std / unit)));
    table
        .meta
        .push(("std_ratio", Cell::Real(report.std_ratio())));
    table
        .meta
        .push(("failures", Cell::Integer(report.failures as u64)));
    table
        .meta
        .push(("degenerate", Cell::Flag(report.degenerate)));

    let mut outcome = Outcome::new(table);
    if settings.check()? {
        let mut v = Vec::new();
        if !(report.empirical_std >= 0.0)
            || report.failures > repeats
            || !report.predicted_std.is_finite()
        {
            v.push("report invariants violated".to_string());
        }
        let again = run_experiment(&spec).map_err(estimator_error)?;
        if again.mean_estimate.to_bits() != report.mean_estimate.to_bits()
            || again.empirical_std.to_bits() != report.empirical_std.to_bits()
        {
            v.push("rerun with the same seed differs".to_string());
        }
        if !report.degenerate {
            let m = (repeats - report.failures) as f64;
            let bias = (report.mean_estimate - phi_true).abs();
            if bias > 4.0 * report.predicted_std / m.sqrt() {
                v.push(format!("bias {bias:e} beyond 4 predicted standard errors"));
            }
            let band = 4.0 / (2.0 * (m - 1.0)).sqrt();
            if (report.std_ratio() - 1.0).abs() > band {
                v.push(format!(
                    "std ratio {} outside 1 +- {band}",
                    report.std_ratio()
                ));
            }
        }
        outcome.violations = v;
    }
    Ok((outcome, settings))
}

fn estimator_error(e: EstimatorError) -> CliError {
    match e {
        EstimatorError::TooManyFailures { .. } | EstimatorError::DivergentPrediction(_) => {
            CliError::new(ExitKind::EstimatorAbort, e.to_string())
        }
        other => CliError::config(other.to_string()),
    }
}
