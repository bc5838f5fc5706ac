use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

/// Fixed default seed so that runs are reproducible without flags.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "fgqa", version, about = "Floating-gate quantum annealer toolchain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice JSON to couplings, fields and charging-energy scale.
    Extract(ExtractArgs),
    /// Air-gap versus oxide U_h sweep as CSV.
    SweepUh(SweepArgs),
    /// WKB tunneling amplitude versus control-gate voltage as CSV.
    Tunnel(TunnelArgs),
    /// Logical problem to embedding and layout mask.
    Embed(EmbedArgs),
    /// Anneal a problem given directly as the physical model.
    Anneal(AnnealArgs),
    /// Embed, extract hardware parameters, anneal and decode.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn out(&self) -> Option<&Path> {
        match self {
            Command::Extract(a) => a.out.as_deref(),
            Command::SweepUh(a) => a.out.as_deref(),
            Command::Tunnel(a) => a.out.as_deref(),
            Command::Embed(a) => a.out.as_deref(),
            Command::Anneal(a) => a.out.as_deref(),
            Command::Pipeline(a) => a.out.as_deref(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub lattice: PathBuf,
    /// Output directory; the main artifact goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Lattice JSON whose geometry supplies CR, permittivity and C_H/C_I.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    /// Number of L points spanning 5..30 nm.
    #[arg(long, default_value_t = 26)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TunnelArgs {
    /// Barrier parameters JSON; defaults are used for missing fields.
    #[arg(long)]
    pub barrier: Option<PathBuf>,
    /// Number of V_CG points from 0 V up to the barrier top.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Lattice JSON providing the array size; n × n when omitted.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    pub margin: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct AnnealFlags {
    /// Total anneal time in units of ħ over the model's energy unit.
    #[arg(long, default_value_t = 100.0)]
    pub anneal_time: f64,
    /// Integration steps; defaults to 50 per unit time (at least 1000).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    pub shots: usize,
    /// Dephasing time in seconds; closed evolution when omitted.
    #[arg(long)]
    pub t2_seconds: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub trajectories: usize,
    /// Points of the s-grid for the spectral gap; skipped when omitted.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

impl AnnealFlags {
    pub fn steps(&self) -> usize {
        self.steps.unwrap_or_else(|| ((self.anneal_time * 50.0).ceil() as usize).max(1000))
    }
}

#[derive(Debug, Args)]
pub struct AnnealArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[command(flatten)]
    pub anneal: AnnealFlags,
    /// Transverse amplitude Δ for every qubit, in model energy units.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Size of the model's energy unit in eV (used to convert T2).
    #[arg(long)]
    pub energy_scale_ev: Option<f64>,
    /// Comma-separated anneal times; writes a T-sweep CSV alongside the result.
    #[arg(long, value_delimiter = ',')]
    pub t_sweep: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    pub margin: f64,
    /// Barrier parameters JSON for the Δ estimate.
    #[arg(long)]
    pub barrier: Option<PathBuf>,
    #[command(flatten)]
    pub anneal: AnnealFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
