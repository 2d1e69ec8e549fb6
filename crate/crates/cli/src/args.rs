use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evcond::limit::WindowRule;
use evcond::TestConfig;

#[derive(Debug, Parser)]
#[command(
    name = "evcond",
    version,
    about = "Rank-based test of the bivariate extreme-value condition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one sample at one k; prints a report and exits 1 on rejection.
    Run(RunArgs),
    /// Statistic and critical value over a list of k.
    Scan(ScanArgs),
    /// Write a synthetic sample.
    Gen(GenArgs),
    /// Quantiles of the limiting functional under the closed-form Cauchy measure.
    Table1(Table1Args),
    /// Rejection rate, median and 0.95-quantile of the statistic over simulated Cauchy samples.
    Table2(Table2Args),
    /// Quantiles of the limiting functional, analytic or estimated from a sample.
    Quantiles(QuantilesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Window {
    Renormalized,
    Clamped,
}

impl From<Window> for WindowRule {
    fn from(w: Window) -> Self {
        match w {
            Window::Renormalized => WindowRule::Renormalized,
            Window::Clamped => WindowRule::Clamped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Cauchy,
    Gumbel,
    Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Estimated,
}

/// Monte-Carlo and quadrature settings.
#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Replicates of the limiting functional.
    #[arg(long, default_value_t = TestConfig::DEFAULT_REPS)]
    pub reps: usize,
    /// Midpoint cells per axis on (0, 1]².
    #[arg(long, default_value_t = TestConfig::DEFAULT_QUAD_CELLS)]
    pub grid: usize,
    /// Cells of the angle grid on [0, π/2].
    #[arg(long = "theta-grid", default_value_t = TestConfig::DEFAULT_THETA_CELLS)]
    pub theta_grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; `EVCOND_THREADS` caps this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Whitespace- or comma-separated text file with one pair per line.
    pub sample: PathBuf,
    /// Skip the first non-comment line.
    #[arg(long = "skip-header")]
    pub skip_header: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = TestConfig::DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = TestConfig::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Boundary rule of the smoothing windows.
    #[arg(long, value_enum, default_value_t = Window::Renormalized)]
    pub window: Window,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated, increasing; defaults to 50, 100, …, 500 below n/2.
    #[arg(long = "k-list", value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = TestConfig::DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = TestConfig::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum, default_value_t = Window::Renormalized)]
    pub window: Window,
    /// Only compute the statistic.
    #[arg(long = "no-quantile")]
    pub no_quantile: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also draw both curves into this SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub model: Model,
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gumbel dependence parameter.
    #[arg(long, default_value_t = 10.0)]
    pub theta: f64,
    /// Output file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, alias = "beta", value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0])]
    pub betas: Vec<f64>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Mesh cells per unit on [0, 2] for the analytic measure.
    #[arg(long = "mesh-cells", default_value_t = 100)]
    pub mesh_cells: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long = "k-list", value_delimiter = ',', default_values_t = [100])]
    pub k_list: Vec<usize>,
    #[arg(long, default_value_t = TestConfig::DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = TestConfig::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Number of simulated samples.
    #[arg(long, default_value_t = 300)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TestConfig::DEFAULT_QUAD_CELLS)]
    pub grid: usize,
    /// Critical value; simulated from the analytic measure when absent.
    #[arg(long)]
    pub critical: Option<f64>,
    /// Replicates for the simulated critical value.
    #[arg(long = "limit-reps", default_value_t = TestConfig::DEFAULT_REPS)]
    pub limit_reps: usize,
    #[arg(long = "theta-grid", default_value_t = TestConfig::DEFAULT_THETA_CELLS)]
    pub theta_grid: usize,
    #[arg(long = "mesh-cells", default_value_t = 100)]
    pub mesh_cells: usize,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct QuantilesArgs {
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
    /// Sample file for the estimated mode.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    #[arg(long = "skip-header")]
    pub skip_header: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = TestConfig::DEFAULT_BETA)]
    pub beta: f64,
    /// Comma-separated, increasing, in (0, 1).
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long = "mesh-cells", default_value_t = 100)]
    pub mesh_cells: usize,
    #[arg(long, value_enum, default_value_t = Window::Renormalized)]
    pub window: Window,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
