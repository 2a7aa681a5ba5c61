use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Entanglement and spectroscopy tools for electron-nuclear spin pairs.
///
/// Every subcommand prints one JSON run record on stdout. Units at the
/// boundary are SI, with angles in degrees.
#[derive(Debug, Parser)]
#[command(name = "spinpair", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical temperature below which the Bell-prepared thermal state is entangled.
    Threshold(ThresholdArgs),
    /// Thermal state of the pair and its entanglement after the Bell circuit.
    Thermal(ThermalArgs),
    /// Mixed-state superdense coding with witness and ensemble statistics.
    Sdc(SdcArgs),
    /// Single-run witness decomposition and the sign-flip check.
    WitnessTheorem(WitnessTheoremArgs),
    /// TPPI interferogram of a Bell preparation and its classification.
    Tppi(TppiArgs),
    /// Energy levels and resonance lines of the spin Hamiltonian.
    Lines(LinesArgs),
    /// Fit a g or A tensor from three-plane angular data.
    FitTensor(FitTensorArgs),
    /// Fit T1 saturation recovery or T2 echo decay.
    FitRelax(FitRelaxArgs),
    /// Entanglement measures of a state given as JSON.
    Entangle(EntangleArgs),
    /// Apply a selective pulse sequence to the four-level system.
    Pulses(PulsesArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    /// Electron Larmor frequency, Hz.
    #[arg(long)]
    pub nu_e: f64,
    /// Nucleus from the reference table (1H, 2H, 14N, 15N, 19F).
    #[arg(long, default_value = "1H", conflicts_with = "nu_n")]
    pub nucleus: String,
    /// Nuclear Larmor frequency, Hz; overrides --nucleus.
    #[arg(long)]
    pub nu_n: Option<f64>,
    /// Assume full electron-to-nucleus polarisation transfer.
    #[arg(long)]
    pub transfer: bool,
    /// CSV of the margin against temperature.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThermalArgs {
    /// Kelvin.
    #[arg(long)]
    pub temperature: f64,
    /// Electron Larmor frequency, Hz.
    #[arg(long)]
    pub nu_e: f64,
    #[arg(long, default_value = "1H", conflicts_with = "nu_n")]
    pub nucleus: String,
    /// Nuclear Larmor frequency, Hz; overrides --nucleus.
    #[arg(long)]
    pub nu_n: Option<f64>,
    /// Assume full electron-to-nucleus polarisation transfer.
    #[arg(long)]
    pub transfer: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SdcArgs {
    /// Lower-level population of the nuclear spin, in [0.5, 1].
    #[arg(long)]
    pub p_i: f64,
    /// Lower-level population of the electron spin, in [0.5, 1].
    #[arg(long)]
    pub p_s: f64,
    /// Message bits zx, e.g. 01.
    #[arg(long, default_value = "00")]
    pub message: String,
    /// Molecules in the ensemble.
    #[arg(long, default_value_t = 1e18)]
    pub n: f64,
    /// Monte-Carlo readouts of the ensemble; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct WitnessTheoremArgs {
    /// Grid points per axis over [0.5, 1].
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Grid points per axis for the sign-flip check.
    #[arg(long, default_value_t = 11)]
    pub flip_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TppiArgs {
    /// Phase increment frequency of the MW detection pulse, Hz.
    #[arg(long, default_value_t = 1.0e6)]
    pub nu1: f64,
    /// Phase increment frequency of the RF detection pulse, Hz.
    #[arg(long, default_value_t = 5.2e6)]
    pub nu2: f64,
    /// Entangling transitions, one MW and one RF, e.g. mw24,rf34.
    #[arg(long)]
    pub seq: String,
    /// Initial level 1..4.
    #[arg(long)]
    pub init: usize,
    /// Detection transitions; the MW one must match the entangling MW.
    #[arg(long)]
    pub detect: String,
    /// Sample spacing, s.
    #[arg(long, default_value_t = 25e-9)]
    pub dt: f64,
    #[arg(long, default_value_t = 512)]
    pub steps: usize,
    /// Dephase the prepared state first (control experiment).
    #[arg(long)]
    pub dephase: bool,
    /// CSV of the interferogram.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LinesArgs {
    /// Electron Zeeman frequency, Hz.
    #[arg(long)]
    pub nu_e: f64,
    /// Nuclear Zeeman frequency, Hz.
    #[arg(long)]
    pub nu_n: f64,
    /// Isotropic hyperfine coupling, Hz.
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorKind {
    G,
    A,
}

#[derive(Debug, Args, Serialize)]
pub struct FitTensorArgs {
    /// CSV with header plane,angle_deg,value.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = TensorKind::G)]
    pub quantity: TensorKind,
    /// CSV of observed and fitted values per plane.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RelaxModel {
    T1,
    T2,
}

#[derive(Debug, Args, Serialize)]
pub struct FitRelaxArgs {
    /// CSV with header t_s,signal.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: RelaxModel,
    /// CSV of observed and fitted values.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EntangleArgs {
    /// State JSON: {"dim", "re", "im"} as a vector or a matrix.
    #[arg(long)]
    pub state: PathBuf,
    /// Bipartition as AxB, e.g. 4x4; defaults to the even split.
    #[arg(long)]
    pub cut: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct PulsesArgs {
    /// Comma list such as mw24:pi:90,rf34:pi/2:0,dephase (phase in degrees).
    #[arg(long, required_unless_present = "pseudo_pure")]
    pub seq: Option<String>,
    /// Start in this level 1..4.
    #[arg(long, conflicts_with_all = ["state", "epsilon"])]
    pub init: Option<usize>,
    /// Start from a state JSON file.
    #[arg(long, conflicts_with = "epsilon")]
    pub state: Option<PathBuf>,
    /// Start from the thermal state with this electron polarisation.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Prepend the pseudo-pure preparation (needs --epsilon).
    #[arg(long, requires = "epsilon")]
    pub pseudo_pure: bool,
    /// CSV of level populations after each step.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
