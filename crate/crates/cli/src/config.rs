//! Option resolution: built-in defaults, then the `--config` file, then
//! command-line flags.
//!
//! The config file is flat `key = value` text. Blank lines and lines
//! starting with `#` are skipped; keys are the option names with `_` for
//! `-`. Repeated keys keep the last value.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mzi_core::specfun::{DEFAULT_ORDER, MAX_ORDER, MIN_ORDER};
use mzi_core::{DetectionScheme, InterferometerConfig};

use crate::args::Common;
use crate::CliError;

/// Environment variable overriding the Gauss-Hermite order of diffused
/// models.
pub const QUAD_ORDER_VAR: &str = "MZI_QUAD_ORDER";

pub const KEYS: [&str; 17] = [
    "scheme",
    "photons",
    "gamma",
    "transmission",
    "p0",
    "format",
    "output",
    "check",
    "pi_units",
    "phi",
    "n",
    "n_log",
    "bracket",
    "phi_true",
    "trials",
    "repeats",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Fully merged option values for one invocation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut values = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("config line {}: expected key = value", index + 1))
        })?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "config line {}: unknown key '{key}'",
                index + 1
            )));
        }
        values.insert(key, value.trim().to_string());
    }
    Ok(values)
}

impl Settings {
    /// Merges the config file named in `common` (if any) with the flags in
    /// `common` and the command-specific `extra` flags.
    pub fn resolve(common: &Common, extra: &[(&str, Option<String>)]) -> Result<Self, CliError> {
        let mut values = match &common.config {
            Some(path) => load(path)?,
            None => BTreeMap::new(),
        };
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        };
        if !common.scheme.is_empty() {
            set("scheme", Some(common.scheme.join(",")));
        }
        set("photons", common.photons.map(|v| v.to_string()));
        set("gamma", common.gamma.map(|v| v.to_string()));
        set("transmission", common.transmission.map(|v| v.to_string()));
        set("p0", common.p0.map(|v| v.to_string()));
        set("format", common.format.clone());
        set(
            "output",
            common.output.as_ref().map(|p| p.display().to_string()),
        );
        if common.check {
            set("check", Some("true".into()));
        }
        if common.pi_units {
            set("pi_units", Some("true".into()));
        }
        for (key, value) in extra {
            set(key, value.clone());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| parse_real(key, v)).transpose()
    }

    pub fn integer<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::config(format!("{key}: expected an integer, got '{v}'")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(other) => Err(CliError::config(format!(
                "{key}: expected true or false, got '{other}'"
            ))),
        }
    }

    pub fn check(&self) -> Result<bool, CliError> {
        self.flag("check")
    }

    pub fn pi_units(&self) -> Result<bool, CliError> {
        self.flag("pi_units")
    }

    /// Scale from user phase units to radians.
    pub fn phase_unit(&self) -> Result<f64, CliError> {
        Ok(if self.pi_units()? { PI } else { 1.0 })
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.raw("format").unwrap_or("csv") {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::config(format!(
                "format: expected csv or json, got '{other}'"
            ))),
        }
    }

    pub fn output(&self) -> Option<PathBuf> {
        self.raw("output").map(PathBuf::from)
    }

    pub fn schemes(&self) -> Result<Vec<DetectionScheme>, CliError> {
        let listed = self
            .raw("scheme")
            .ok_or_else(|| CliError::config("a detection scheme is required (--scheme)"))?;
        let p0 = self.real("p0")?.unwrap_or(0.5);
        listed
            .split(',')
            .map(|name| parse_scheme(name.trim(), p0))
            .collect()
    }

    /// The single scheme of commands that take exactly one.
    pub fn scheme(&self) -> Result<DetectionScheme, CliError> {
        let schemes = self.schemes()?;
        match schemes.as_slice() {
            [one] => Ok(*one),
            _ => Err(CliError::config("this command takes exactly one scheme")),
        }
    }

    pub fn scenario(&self, photons: f64) -> Result<InterferometerConfig, CliError> {
        let gamma = self.real("gamma")?.unwrap_or(0.0);
        let transmission = self.real("transmission")?.unwrap_or(1.0);
        InterferometerConfig::new(photons, gamma, transmission)
            .map_err(|e| CliError::config(e.to_string()))
    }

    pub fn photons(&self) -> Result<f64, CliError> {
        self.real("photons")?
            .ok_or_else(|| CliError::config("a photon number is required (-N)"))
    }

    /// Photon numbers from `n`, else `n_log`, else the single `photons`.
    pub fn photon_sweep(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = self.raw("n") {
            let values: Vec<f64> = list
                .split(',')
                .map(|v| parse_real("n", v.trim()))
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(CliError::config("n: empty list"));
            }
            return Ok(values);
        }
        if let Some(spec) = self.raw("n_log") {
            let parts: Vec<&str> = spec.split(':').collect();
            let [a, b, k] = parts.as_slice() else {
                return Err(CliError::config(format!(
                    "n_log: expected a:b:k, got '{spec}'"
                )));
            };
            let (a, b) = (parse_real("n_log", a)?, parse_real("n_log", b)?);
            let k: usize = k
                .parse()
                .map_err(|_| CliError::config(format!("n_log: bad point count '{k}'")))?;
            if k < 1 || !(a <= b) || (k == 1 && a != b) {
                return Err(CliError::config(format!("n_log: invalid range '{spec}'")));
            }
            let step = if k == 1 {
                0.0
            } else {
                (b - a) / (k - 1) as f64
            };
            return Ok((0..k).map(|i| 10f64.powf(a + step * i as f64)).collect());
        }
        Ok(vec![self.photons()?])
    }

    /// Phase grid in radians from `phi`, or `default` if unset.
    pub fn grid(&self, default: (f64, f64, usize)) -> Result<Vec<f64>, CliError> {
        let unit = self.phase_unit()?;
        let (start, end, points) = match self.raw("phi") {
            Some(spec) => parse_grid(spec)?,
            None => (default.0 / unit, default.1 / unit, default.2),
        };
        mzi_core::metrology::phase_grid(start * unit, end * unit, points).map_err(|_| {
            CliError::config(format!("phi: empty or invalid grid {start}:{end}:{points}"))
        })
    }

    pub fn bracket(&self) -> Result<Option<mzi_core::Bracket>, CliError> {
        let Some(spec) = self.raw("bracket") else {
            return Ok(None);
        };
        let unit = self.phase_unit()?;
        let (lo, hi) = spec
            .split_once(':')
            .ok_or_else(|| CliError::config(format!("bracket: expected lo:hi, got '{spec}'")))?;
        let (lo, hi) = (
            parse_real("bracket", lo)? * unit,
            parse_real("bracket", hi)? * unit,
        );
        mzi_core::Bracket::new(lo, hi)
            .map(Some)
            .map_err(|e| CliError::config(e.to_string()))
    }
}

fn load(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse_real(key: &str, text: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("{key}: expected a number, got '{text}'")))
}

pub fn parse_grid(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, points] = parts.as_slice() else {
        return Err(CliError::config(format!(
            "phi: expected start:end:points, got '{spec}'"
        )));
    };
    let points = points
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("phi: bad point count '{points}'")))?;
    Ok((parse_real("phi", start)?, parse_real("phi", end)?, points))
}

pub fn parse_scheme(name: &str, p0: f64) -> Result<DetectionScheme, CliError> {
    match name {
        "parity" => Ok(DetectionScheme::Parity),
        "zero-nonzero" | "z" => Ok(DetectionScheme::ZeroNonzero),
        "homodyne-zero" => Ok(DetectionScheme::HomodyneZero),
        "homodyne-window" => {
            DetectionScheme::window(p0).map_err(|e| CliError::config(e.to_string()))
        }
        other => Err(CliError::config(format!("unknown scheme '{other}'"))),
    }
}

/// Quadrature order from [`QUAD_ORDER_VAR`], or the library default.
pub fn quad_order() -> Result<usize, CliError> {
    match std::env::var(QUAD_ORDER_VAR) {
        Err(_) => Ok(DEFAULT_ORDER),
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(order) if (MIN_ORDER..=MAX_ORDER).contains(&order) => Ok(order),
            _ => Err(CliError::config(format!(
                "{QUAD_ORDER_VAR}: expected an integer in [{MIN_ORDER}, {MAX_ORDER}], got '{text}'"
            ))),
        },
    }
}
