use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mzi",
    version,
    about = "Binary-outcome phase estimation in a coherent-light Mach-Zehnder interferometer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signal, probability, sensitivity and Fisher information over a phase grid.
    Scan(ScanArgs),
    /// Best sensitivity per photon number, exact and closed form.
    Best(SweepArgs),
    /// Fringe width per photon number, exact and closed form.
    Fwhm(SweepArgs),
    /// Monte Carlo run of the signal-inversion estimator.
    Estimate(EstimateArgs),
}

/// Options shared by every command. Each one can also be set in the
/// `--config` file under the name given in its help text; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Detection scheme: parity, zero-nonzero, homodyne-zero or homodyne-window [key: scheme].
    #[arg(long, value_name = "SCHEME")]
    pub scheme: Vec<String>,
    /// Mean photon number [key: photons].
    #[arg(short = 'N', long = "photons", value_name = "N")]
    pub photons: Option<f64>,
    /// Phase-diffusion rate [key: gamma].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Transmission of the lossy arm, 1 for no loss [key: transmission].
    #[arg(long)]
    pub transmission: Option<f64>,
    /// Half-width of the homodyne window [key: p0].
    #[arg(long)]
    pub p0: Option<f64>,
    /// Output format: csv or json [key: format].
    #[arg(long)]
    pub format: Option<String>,
    /// Output file, written atomically; standard output when absent [key: output].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Flat key=value file with defaults for any option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Verify module invariants on the results and exit 6 on a violation [key: check].
    #[arg(long)]
    pub check: bool,
    /// Read and write phases in units of pi [key: pi_units].
    #[arg(long)]
    pub pi_units: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Phase grid start:end:points [key: phi].
    #[arg(long, allow_hyphen_values = true, value_name = "START:END:POINTS")]
    pub phi: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated photon numbers [key: n].
    #[arg(long = "n", value_name = "LIST")]
    pub n: Option<String>,
    /// Log-spaced photon numbers 10^a to 10^b in k points, as a:b:k [key: n_log].
    #[arg(long, value_name = "A:B:K")]
    pub n_log: Option<String>,
    /// Optimizer bracket lo:hi (best only) [key: bracket].
    #[arg(long, value_name = "LO:HI")]
    pub bracket: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// True phase [key: phi_true].
    #[arg(long, allow_hyphen_values = true)]
    pub phi_true: Option<f64>,
    /// Binary trials per repetition [key: trials].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Repetitions [key: repeats].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Random seed [key: seed].
    #[arg(long)]
    pub seed: Option<u64>,
}
