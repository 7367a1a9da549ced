use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

fn date(text: &str) -> Result<NaiveDate, String> {
    lppl_core::io::parse_date(text)
        .ok_or_else(|| format!("expected YYYY-MM-DD or DD.MM.YYYY, got {text:?}"))
}

#[derive(Debug, Parser)]
#[command(name = "lppl", version, about = "Log-periodic power-law bubble fitting")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file whose keys mirror the command-line flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for the fitter (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one window.
    Fit(FitCmd),
    /// Shrinking-window scan with fixed end date.
    Scan(ScanCmd),
    /// Pearson correlations of levels and returns against a reference series.
    Correlate(CorrelateCmd),
    /// Equal-weight basket of standardised components.
    Basket(BasketCmd),
    /// Element-wise reciprocal of a price series.
    Invert(TransformCmd),
    /// Rescale to mean 2 and standard deviation 1.
    Standardize(TransformCmd),
    /// Generate a synthetic LPPL series and its ground truth.
    Synth(SynthCmd),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Date column: zero-based index or header name.
    #[arg(long, default_value = "0")]
    pub date_col: String,
    /// Value column: zero-based index or header name.
    #[arg(long, default_value = "1")]
    pub value_col: String,
    /// Drop observations before this date.
    #[arg(long, value_parser = date)]
    pub from: Option<NaiveDate>,
    /// Drop observations after this date.
    #[arg(long, value_parser = date)]
    pub to: Option<NaiveDate>,
    /// Take the reciprocal of the prices first.
    #[arg(long)]
    pub invert: bool,
    /// Standardise (mean 2, std 1) after the optional inversion.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaMode {
    /// omega within the constraint bounds, [6, 13] by default.
    Free,
    /// omega within [8.5, 9.7].
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintPreset {
    /// `standard` for standardised input, `raw` otherwise.
    Auto,
    /// 0 < m < 1, 6 <= omega <= 13, B < 0, |C| < 1, tc after the window.
    Standard,
    /// As `standard` without the |C| cap.
    Raw,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Start values for m: `from:to:step` or a comma-separated list.
    #[arg(long, default_value = "0.1:0.9:0.05")]
    pub m_grid: String,
    /// Spacing of tc starts in trading days.
    #[arg(long, default_value_t = 5.0)]
    pub tc_step: f64,
    /// tc starts reach this fraction of the window length past its end.
    #[arg(long, default_value_t = 0.1)]
    pub tc_span: f64,
    #[arg(long, value_enum, default_value_t = OmegaMode::Free)]
    pub omega_mode: OmegaMode,
    /// Seed for omega (default 2 pi / ln 2).
    #[arg(long)]
    pub omega_start: Option<f64>,
    #[arg(long, value_enum, default_value_t = ConstraintPreset::Auto)]
    pub constraints: ConstraintPreset,
    /// Relative SSR tolerance of the local minimiser.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Holiday file (one date per line) added to the weekend calendar.
    #[arg(long, value_name = "PATH")]
    pub holidays: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Write plot data (CSV) here.
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// First window start.
    #[arg(long, value_parser = date)]
    pub t1_first: NaiveDate,
    /// Last window start (inclusive).
    #[arg(long, value_parser = date)]
    pub t1_last: NaiveDate,
    /// Trading days between window starts.
    #[arg(long, default_value_t = 5)]
    pub t1_step: usize,
    /// Common window end.
    #[arg(long, value_parser = date)]
    pub t2: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReturnsArg {
    /// First differences.
    Diff,
    /// Log returns.
    Log,
}

#[derive(Debug, Args)]
pub struct CorrelateCmd {
    /// Reference series (e.g. oil).
    #[arg(long, value_name = "PATH")]
    pub reference: PathBuf,
    /// Series to correlate against the reference; repeat for several.
    #[arg(long = "input", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_parser = date)]
    pub from: Option<NaiveDate>,
    #[arg(long, value_parser = date)]
    pub to: Option<NaiveDate>,
    #[arg(long, value_enum, default_value_t = ReturnsArg::Diff)]
    pub returns: ReturnsArg,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasketModeArg {
    /// Standardise components, average, standardise again.
    Standardized,
    /// Average raw components, then standardise.
    RawSum,
}

#[derive(Debug, Args)]
pub struct BasketCmd {
    /// Component series; repeat for each.
    #[arg(long = "input", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = BasketModeArg::Standardized)]
    pub mode: BasketModeArg,
    /// Invert every component before combining.
    #[arg(long)]
    pub invert: bool,
    #[arg(long, value_parser = date)]
    pub from: Option<NaiveDate>,
    #[arg(long, value_parser = date)]
    pub to: Option<NaiveDate>,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformCmd {
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Series CSV to write.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
    /// Ground-truth JSON sidecar to write.
    #[arg(long, value_name = "PATH")]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 100.0)]
    pub a: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub c2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub m: f64,
    #[arg(long, default_value_t = 9.0)]
    pub omega: f64,
    /// Critical time as an index; defaults to 20 days past the last observation.
    #[arg(long)]
    pub tc: Option<f64>,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = date, default_value = "2014-06-12")]
    pub start_date: NaiveDate,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}
