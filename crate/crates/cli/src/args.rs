//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "qfb", version, about = "Coherent-feedback amplifier networks and detector noise budgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Commutator / unitarity report for a network, as one JSON line.
    Check(CheckArgs),
    /// Gain and phase of transfer-matrix entries on a frequency grid.
    Bode(BodeArgs),
    /// Nyquist curve of a scalar open loop with its stability verdict.
    Nyquist(NyquistArgs),
    /// Mean-value time evolution of a loop-cavity model.
    Simulate(SimulateArgs),
    /// Detector noise budgets: baseline, LQG-controlled, or a loss sweep.
    Gw(GwArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    /// Rates and frequencies are angular (s⁻¹).
    Angular,
    /// Rates and frequencies are in Hz and multiplied by 2π on input.
    Hertz,
}

impl Unit {
    pub fn factor(self) -> f64 {
        match self {
            Unit::Angular => 1.0,
            Unit::Hertz => std::f64::consts::TAU,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Lowest frequency.
    #[arg(long = "min")]
    pub min: Option<f64>,
    /// Highest frequency.
    #[arg(long = "max")]
    pub max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Scale::Log)]
    pub scale: Scale,
    #[arg(long, value_enum, default_value_t = Unit::Angular)]
    pub unit: Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NetworkKind {
    Ndpa,
    Lpf,
    Hpf,
    BeamSplitter,
    Butterworth,
    /// Amplifier closed through a symmetric low-pass cavity.
    Differentiator,
    /// Amplifier closed through a symmetric high-pass cavity.
    Integrator,
    /// Amplifier closed through an asymmetric high-pass cavity.
    ActiveFilter,
    /// Directional three-port loop through a beam splitter.
    Nonreciprocal,
    /// Four-mode loop-cavity realization of the integrator.
    IntegratorModel,
    /// Loop-cavity all-pass phase filter.
    PhaseFilter,
    /// The identically zero scalar loop.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// The component itself.
    Element,
    /// Closed loop with a finite-gain amplifier.
    Finite,
    /// Infinite-gain limit of the closed loop.
    Ideal,
}

#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    #[arg(long, value_enum)]
    pub network: NetworkKind,
    /// Defaults to `finite` for loops and `element` for components.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Amplifier mirror rate; defaults to gamma-ratio · lambda.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.01)]
    pub gamma_ratio: f64,
    /// Controller rate for symmetric cavities.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long)]
    pub kappa1: Option<f64>,
    #[arg(long)]
    pub kappa2: Option<f64>,
    /// Cavity detuning; the Butterworth controller defaults to (kappa1 + kappa2)/2.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Beam-splitter power transmissivity.
    #[arg(long, default_value_t = 0.5)]
    pub transmissivity: f64,
    /// Loop-cavity rate c/L4; defaults to 1000·kappa.
    #[arg(long)]
    pub c_over_l4: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub net: Option<NetworkArgs>,
    /// Constant matrix file to check instead of a named network.
    #[arg(long, conflicts_with = "network")]
    pub matrix_file: Option<PathBuf>,
    /// Port kinds of a matrix file, e.g. `a,c` (a = annihilation, c = creation).
    #[arg(long)]
    pub signature: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct BodeArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Entries as 1-based `ij` pairs, e.g. `21,11`; all entries by default.
    #[arg(long, value_delimiter = ',')]
    pub entries: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NyquistArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Smallest |ω| of the log-spaced sampling.
    #[arg(long = "min")]
    pub min: Option<f64>,
    /// Largest |ω|.
    #[arg(long = "max")]
    pub max: Option<f64>,
    /// Initial samples per decade before adaptive refinement.
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Unit::Angular)]
    pub unit: Unit,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    SelfOscillator,
    Integrator,
    CustomFile,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// State-space file for `custom-file`.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.01)]
    pub gamma_ratio: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub kappa: f64,
    /// Loop-cavity rate c/L4.
    #[arg(long, default_value_t = 0.1)]
    pub c_over_l4: f64,
    /// Controller detuning of the self-oscillator.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Second kappa whose trajectory is appended as `cmp_*` columns.
    #[arg(long)]
    pub compare_kappa: Option<f64>,
    /// Initial means `re,im;re,im;…`; every state starts at 1/√2 by default.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub t_points: usize,
    #[arg(long, value_enum, default_value_t = Unit::Angular)]
    pub unit: Unit,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GwMode {
    Baseline,
    Controlled,
    Sweep,
}

#[derive(Args, Debug)]
pub struct GwArgs {
    #[arg(long, value_enum)]
    pub mode: GwMode,
    /// `key = value` parameter file layered over the built-in defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Loss channel for `sweep`: gamma_1loss, kappa_3loss or kappa_4loss.
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
