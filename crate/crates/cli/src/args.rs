use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// An angle given in radians, or in degrees with a `deg` suffix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Angle(pub f64);

pub fn parse_angle(s: &str) -> Result<Angle> {
    let s = s.trim();
    let (number, scale) = if let Some(n) = s.strip_suffix("deg").or_else(|| s.strip_suffix('°')) {
        (n, PI / 180.0)
    } else if let Some(n) = s.strip_suffix("rad") {
        (n, 1.0)
    } else {
        (s, 1.0)
    };
    let v: f64 = number.trim().parse().with_context(|| format!("cannot read angle `{s}`"))?;
    if !v.is_finite() {
        bail!("angle `{s}` is not finite");
    }
    Ok(Angle(v * scale))
}

pub fn parse_angle_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| parse_angle(p).map(|a| a.0)).collect()
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow::anyhow!("cannot read `{p}`: {e}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Grid,
    Lattice,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bohm-qubits", version, about = "Bohmian statistics of two entangled spin-1/2 rotors")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Entanglement angle ϑ (radians, or degrees with a `deg` suffix)
    #[arg(long, global = true, env = "BOHMQ_THETA", default_value = "90deg", allow_hyphen_values = true, value_parser = parse_angle)]
    pub theta: Angle,
    /// Relative phase φ
    #[arg(long, global = true, env = "BOHMQ_PHI", default_value = "0", allow_hyphen_values = true, value_parser = parse_angle)]
    pub phi: Angle,
    /// Ensemble sampler; dist and entropy default to lattice, corr and bell to grid
    #[arg(long, global = true, env = "BOHMQ_SAMPLER")]
    pub sampler: Option<SamplerKind>,
    /// Grid points per axis, either `N` or `Nα₁,Nβ₁,Nα₂,Nβ₂`
    #[arg(long, global = true, env = "BOHMQ_GRID", default_value = "64")]
    pub grid: String,
    /// Lattice points or Monte Carlo samples
    #[arg(long, global = true, env = "BOHMQ_SAMPLES", default_value_t = 1 << 24)]
    pub samples: u64,
    #[arg(long, global = true, env = "BOHMQ_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Number of histogram bins; overrides --epsilon
    #[arg(long, global = true, env = "BOHMQ_BINS")]
    pub bins: Option<usize>,
    /// Histogram bin width
    #[arg(long, global = true, env = "BOHMQ_EPSILON", default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Upper end of the histogram range
    #[arg(long = "mu-max", global = true, env = "BOHMQ_MU_MAX", default_value_t = 5.0)]
    pub mu_max: f64,
    /// Worker threads (0 uses every core); results do not depend on it
    #[arg(long, global = true, env = "BOHMQ_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Output file, `-` for standard output
    #[arg(long, short, global = true, env = "BOHMQ_OUTPUT", default_value = "-")]
    pub output: String,
    #[arg(long, global = true, env = "BOHMQ_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Histogram of one observable with the closed-form overlay
    Dist(DistArgs),
    /// Correlation tensors, angle statistics and quantum references
    Corr(SweepArgs),
    /// Hemisphere probability and differential/discretized entropies of M₁z
    Entropy(EntropyArgs),
    /// CHSH values of the quantum and Bohmian correlators
    Bell(BellArgs),
    /// Integrate one trajectory of the guidance equations
    Traj(TrajArgs),
    /// Run the acceptance suite
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[arg(long, env = "BOHMQ_OBSERVABLE")]
    pub observable: String,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Evaluate ϑ at this many equally spaced points in [0, π/2] instead of --theta
    #[arg(long)]
    pub sweep: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Resolutions ν of the discretized entropy H_ν
    #[arg(long, default_value = "1,2,4,8")]
    pub nu: String,
}

#[derive(Debug, Clone, Args)]
pub struct BellArgs {
    /// Analyzer angles `a,a′,b,b′` in the x–z plane
    #[arg(long, conflicts_with_all = ["optimal", "random"], allow_hyphen_values = true)]
    pub angles: Option<String>,
    /// Use a = 0°, a′ = 90°, b = 45°, b′ = 315° (the default)
    #[arg(long)]
    pub optimal: bool,
    /// Evaluate this many random setups drawn with --seed
    #[arg(long)]
    pub random: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrajArgs {
    /// Starting angles `α₁,β₁,γ₁,α₂,β₂,γ₂`; drawn from the equilibrium ensemble with --seed if absent
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long = "t-end", default_value_t = 10.0, allow_negative_numbers = true)]
    pub t_end: f64,
    /// Dense-output spacing; every accepted step is written if absent
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long = "max-step", default_value_t = 0.5)]
    pub max_step: f64,
    /// Largest accepted drift of a conserved quantity per unit time
    #[arg(long = "drift-limit", default_value_t = 1e-8)]
    pub drift_limit: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// `desk` for full resolution, `smoke` for a quick wiring check
    #[arg(long, default_value = "desk")]
    pub scale: String,
    /// Comma-separated criterion numbers; all when absent
    #[arg(long)]
    pub only: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("1.5").unwrap().0, 1.5);
        assert_eq!(parse_angle("2rad").unwrap().0, 2.0);
        assert!((parse_angle("90deg").unwrap().0 - PI / 2.0).abs() < 1e-15);
        assert!((parse_angle("45°").unwrap().0 - PI / 4.0).abs() < 1e-15);
        assert!(parse_angle("abc").is_err());
        assert!(parse_angle("infdeg").is_err());
        assert_eq!(parse_angle_list("0,90deg").unwrap().len(), 2);
    }
}
