use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "thinwg", version)]
#[command(
    about = "Thin high-contrast waveguide: forward model, resonance scans and core identification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML run configuration. Missing keys take the reference defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Noise seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Noise level in percent of each field component.
    #[arg(long, global = true, value_name = "PCT")]
    pub noise: Option<f64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Lower end of the frequency sweep.
    #[arg(long, global = true, value_name = "K")]
    pub kmin: Option<f64>,

    /// Upper end of the frequency sweep.
    #[arg(long, global = true, value_name = "K")]
    pub kmax: Option<f64>,

    /// Number of coarse sweep intervals.
    #[arg(long, global = true, value_name = "N")]
    pub ksteps: Option<usize>,

    /// Only report errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact field, its thin-core asymptote and their difference on a grid.
    Green(GreenArgs),
    /// Resonance sweep E(k) with derivative norms and peak bands.
    Scan(DataArgs),
    /// Simulate a dataset from the configuration.
    Synth(SynthArgs),
    /// Identify nbar, the pose and h from a dataset or a fresh simulation.
    Invert(DataArgs),
    /// Fit the peak-width constant C from datasets with known h.
    Calibrate(CalibrateArgs),
    /// Run the acceptance suite and the report schema check.
    Selftest(SelftestArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Zero,
    One,
}

#[derive(Args, Debug)]
pub struct GreenArgs {
    /// Frequency.
    #[arg(long)]
    pub k: f64,

    /// Order of the asymptote compared against.
    #[arg(long, value_enum, default_value_t = OrderArg::Zero)]
    pub order: OrderArg,

    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub z_min: f64,
    #[arg(long, default_value_t = 7.0, allow_hyphen_values = true)]
    pub z_max: f64,
    #[arg(long, default_value_t = 27)]
    pub nz: usize,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Dataset CSV (with its JSON sidecar). Without it the configuration is simulated.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Largest accepted distance to a stored frequency. Defaults to half the coarse step.
    #[arg(long, value_name = "DK")]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Uniform grid of ksteps + 1 frequencies instead of the frequencies the pipeline requests.
    #[arg(long)]
    pub grid: bool,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Datasets from controlled experiments.
    #[arg(required = true, value_name = "PATH")]
    pub datasets: Vec<PathBuf>,

    /// Known thickness per dataset, in order. Defaults to the true h in each sidecar.
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<f64>,

    /// Largest accepted distance to a stored frequency.
    #[arg(long, value_name = "DK")]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Criteria to run, e.g. `1,2,9`. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<usize>,
}
