use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lineqkd", version, about = "Key rates and session simulations for amplified long-haul QKD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal key fraction at one operating point.
    Rate(Common),
    /// Optimal key fraction over a list of values of one parameter, as CSV.
    Sweep(SweepArgs),
    /// Monte Carlo session with reconciliation and privacy amplification.
    Simulate(Common),
}

/// Flags shared by all subcommands. Every one of them can also be given in
/// the `--config` file; flags on the command line win.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// `key = value` file with defaults for any of these flags (long names, without dashes).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write CSV (rate, sweep) or the session snapshot (simulate) here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Alice–Bob distance, km [default: 1000].
    #[arg(long)]
    pub dab: Option<f64>,
    /// Alice–splice distance, km [default: half of --dab].
    #[arg(long)]
    pub dae: Option<f64>,
    /// Amplifier spacing, km [default: 50].
    #[arg(long)]
    pub d: Option<f64>,
    /// Fraction of intensity tapped at the splice [default: 0].
    #[arg(long)]
    pub re: Option<f64>,
    /// Signal amplitude; optimized when omitted.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Detection threshold; optimized when omitted.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of rounds [default: 1000000].
    #[arg(long = "L")]
    pub rounds: Option<u64>,
    /// Fiber loss, km⁻¹ (span transmission 10^(-mu·d)) [default: 0.02].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Reconciliation block length [default: 1000].
    #[arg(long)]
    pub chunk: Option<usize>,
    /// Sifted bits disclosed for error estimation [default: 1000].
    #[arg(long)]
    pub disclosure: Option<usize>,
    /// Allow distances that are not whole multiples of the spacing.
    #[arg(long)]
    pub fractional_stages: bool,
}

#[derive(Debug, Args, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter to vary: r_E, d, D_AB, D_AE, gamma or theta.
    #[arg(long = "var")]
    pub variable: Option<String>,
    /// Comma-separated values, evaluated and written in this order.
    #[arg(long)]
    pub values: Option<String>,
}
