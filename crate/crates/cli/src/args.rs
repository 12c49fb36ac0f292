use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ph_stability::model::DEFAULT_SAFETY;
use ph_stability::models::Preset;
use ph_stability::stability::{DEFAULT_CELLS, DEFAULT_DECAY_MEMBERS, DEFAULT_ENSEMBLE, DEFAULT_EXTINCTION_FLOOR};

/// Simulation and energy-based stability analysis of port-Hamiltonian systems on an interval.
#[derive(Debug, Parser)]
#[command(name = "phstab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural assumptions and write validation.json.
    Validate(Common),
    /// Simulate one initial condition and write trajectory.csv and energy.csv.
    Simulate(SimulateArgs),
    /// Evaluate the local energy functionals and their monotonicity.
    Energy(EnergyArgs),
    /// Run the full stability pipeline and write stability.json.
    Stability(StabilityArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML system description.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// Density per string (one value is broadcast).
    #[arg(long, num_args = 1.., requires = "preset")]
    pub rho: Vec<f64>,
    /// Tension per string (one value is broadcast).
    #[arg(long, num_args = 1.., requires = "preset")]
    pub tension: Vec<f64>,
    /// Damping per damper (one value is broadcast).
    #[arg(long, num_args = 1.., requires = "preset")]
    pub sigma: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], requires = "preset")]
    pub interval: Option<Vec<f64>>,
    /// Grid cells.
    #[arg(long = "N", default_value_t = DEFAULT_CELLS)]
    pub cells: usize,
    /// Time step; defaults to h/(2 γ M).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for ensemble members; defaults to the available cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Safety factor applied to the propagation constants.
    #[arg(long, default_value_t = DEFAULT_SAFETY)]
    pub safety: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Final time; defaults to four traversal times.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Ensemble member used as initial condition.
    #[arg(long, default_value_t = 0)]
    pub member: u64,
    /// Start from the zero state.
    #[arg(long)]
    pub zero_initial: bool,
    /// Write every k-th snapshot to trajectory.csv; defaults to about 200 snapshots.
    #[arg(long)]
    pub every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Final time; defaults to the end of the latest window.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub member: u64,
    /// Start of the time window of F.
    #[arg(long)]
    pub t_sigma: Option<f64>,
    /// End of the time window of F.
    #[arg(long)]
    pub t_tau: Option<f64>,
    /// Slope of the F windows.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Slope of the G windows.
    #[arg(long)]
    pub gamma_space: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Override of the growth constant of F.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Override of the growth constant of F̃.
    #[arg(long)]
    pub kappa_reflected: Option<f64>,
    /// Tolerance constant C in C (h + dt) E(0).
    #[arg(long, default_value_t = ph_stability::energy::DEFAULT_TOLERANCE_CONSTANT)]
    pub tolerance_constant: f64,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = DEFAULT_ENSEMBLE)]
    pub ensemble: usize,
    /// Observation window start.
    #[arg(long, requires_all = ["t_tau", "t_final"])]
    pub t_sigma: Option<f64>,
    /// Observation window end.
    #[arg(long, requires_all = ["t_sigma", "t_final"])]
    pub t_tau: Option<f64>,
    /// Time at which the energy loss is measured.
    #[arg(long, requires_all = ["t_sigma", "t_tau"])]
    pub t_final: Option<f64>,
    /// Horizon of the decay fit; defaults to sixteen traversal times.
    #[arg(long)]
    pub decay_horizon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DECAY_MEMBERS)]
    pub decay_members: usize,
    #[arg(long, default_value_t = DEFAULT_EXTINCTION_FLOOR)]
    pub extinction_floor: f64,
    /// Distance of the short-time bump from the ends; defaults to (b - a)/5.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: ph_stability::models::ModelsError| e.to_string())
}
