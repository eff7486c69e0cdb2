use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lazymc::harness::FamilyKind;

#[derive(Debug, Parser)]
#[command(
    name = "lazymc",
    version,
    about = "Analyze, simulate and learn finite Markov chains and their lazy versions"
)]
pub struct Cli {
    /// Worker threads for the Monte Carlo harness.
    #[arg(long, global = true, env = "LAZYMC_THREADS")]
    pub threads: Option<usize>,
    /// Write the output document here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural and spectral profile of a chain.
    Analyze(MatrixArgs),
    /// The α-lazy version αI + (1−α)M.
    Lazy(AlphaMatrixArgs),
    /// The inverse lazy map (N − αI)/(1−α), which may leave the stochastic matrices.
    Unlazy(AlphaMatrixArgs),
    /// ℓ1 projection of a vector onto the simplex, or of every matrix row.
    Project(ProjectArgs),
    /// Sample a trajectory of M.
    Simulate(SimulateArgs),
    /// Sample a trajectory of L_α(M) with the coin construction.
    SimulateLazy(SimulateLazyArgs),
    /// Learn the transition matrix from one simulated (or supplied) trajectory.
    Learn(LearnArgs),
    /// Estimate the minimum stationary probability from one trajectory.
    EstimatePistar(EstimateArgs),
    /// Test whether a chain equals a reference chain.
    TestIdentity(TestIdentityArgs),
    /// Monte Carlo risk over a chain family.
    Risk(RiskArgs),
    /// Empirical sample complexity over a length grid.
    Complexity(ComplexityArgs),
    /// Pseudo-spectral-gap ratios of chains and their lazy versions.
    ScanConjecture(ScanArgs),
    /// Run the full claim suite; exits 3 if any claim fails.
    VerifyPaper(VerifyArgs),
}

pub fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in the open interval (0, 1)"))
    }
}

pub fn positive(s: &str) -> Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a nonnegative integer"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".to_string())
    }
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Matrix file: JSON `{d, rows}`, a JSON array of rows, or CSV.
    #[arg(long)]
    pub matrix: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlphaMatrixArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_parser = unit_interval)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long, conflicts_with = "vector", required_unless_present = "vector")]
    pub matrix: Option<PathBuf>,
    /// Vector file: JSON `{probs}`, a JSON array, or one CSV line.
    #[arg(long)]
    pub vector: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Trajectory length.
    #[arg(long, value_parser = positive)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial law (default uniform).
    #[arg(long)]
    pub initial: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateLazyArgs {
    #[command(flatten)]
    pub base: SimulateArgs,
    #[arg(long, value_parser = unit_interval)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_parser = positive)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run the lazy extension with this α.
    #[arg(long, value_parser = unit_interval)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub initial: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Chain to simulate from; also used to report the estimation error.
    #[arg(long, required_unless_present = "path")]
    pub matrix: Option<PathBuf>,
    /// Learn from this trajectory (JSON array or `{states}`) instead of simulating.
    #[arg(long, requires = "states")]
    pub path: Option<PathBuf>,
    /// State count for `--path`.
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long, value_parser = positive, required_unless_present = "path")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = unit_interval)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub initial: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestIdentityArgs {
    #[command(flatten)]
    pub base: EstimateArgs,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long, value_parser = unit_interval)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Oracle,
    MatrixDirect,
    MatrixExtended,
    PiStarDirect,
    PiStarExtended,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment document (estimator, families, grids, seed); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKind>,
    /// Laziness for the extended estimators.
    #[arg(long, value_parser = unit_interval)]
    pub alpha: Option<f64>,
    /// Chain files added to the family.
    #[arg(long)]
    pub matrix: Vec<PathBuf>,
    /// Generated family kind.
    #[arg(long, value_parser = family_kind)]
    pub family: Option<FamilyKind>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub d_min: usize,
    #[arg(long)]
    pub d_max: Option<usize>,
    #[arg(long, value_parser = unit_interval)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, value_parser = positive)]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated, strictly increasing lengths.
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    pub grid: Option<Vec<usize>>,
    #[arg(long, value_parser = unit_interval)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub matrix: Vec<PathBuf>,
    #[arg(long, value_parser = family_kind, default_value = "leaky-cycle")]
    pub family: FamilyKind,
    /// Generated chains; 0 scans only the `--matrix` files.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long, default_value_t = 3)]
    pub d_min: usize,
    #[arg(long, default_value_t = 6)]
    pub d_max: usize,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, default_value = "0.1,0.5,0.9")]
    pub alpha_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Reduced sizes that finish in seconds.
    #[arg(long)]
    pub quick: bool,
    /// Suite configuration document; overrides `--quick`.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn family_kind(s: &str) -> Result<FamilyKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        "expected one of dirichlet-ergodic, reversible-random-walk, periodic-bipartite, \
         rank-one, leaky-cycle, user-file"
            .to_string()
    })
}
