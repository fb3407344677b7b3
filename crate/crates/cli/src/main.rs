//! `quadbench` command-line driver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use quadbench::kinodyn::Category;
use quadbench::scenegen::{ExportFormat, Family};

#[derive(Debug, Parser)]
#[command(name = "quadbench", version, about = "Quadrotor navigation benchmark")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "quadbench-out")]
    pub out: PathBuf,
    /// Weight configuration (JSON). Defaults to `<out>/weights.json`, written if absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scene files and manifests.
    Gen(GenArgs),
    /// List the platform dataset.
    Platforms(PlatformArgs),
    /// Run the algorithm × scenario × platform trial matrix.
    Run(RunArgs),
    /// Score a results file or a score table.
    Score(ScoreArgs),
    /// Per-scenario and per-platform summaries with confidence intervals.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Difficulty index; all ten when omitted.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=10))]
    pub index: Option<u32>,
    #[arg(long, default_value = "pcd", value_parser = parse_format)]
    pub format: ExportFormat,
    /// Surface samples per square metre for point clouds.
    #[arg(long, default_value_t = 25.0)]
    pub density: f64,
}

#[derive(Debug, Args)]
pub struct PlatformArgs {
    #[arg(long, value_parser = parse_category)]
    pub category: Option<Category>,
    #[arg(long)]
    pub name: Option<String>,
    /// Print per-category means next to the published values.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Comma-separated planners: straight, reference.
    #[arg(long, value_delimiter = ',', default_value = "straight,reference")]
    pub algorithms: Vec<String>,
    /// Comma-separated platform names. Defaults to four representative platforms.
    #[arg(long, value_delimiter = ',')]
    pub platforms: Vec<String>,
    /// Use every platform of this category instead of a name list.
    #[arg(long, value_parser = parse_category, conflicts_with = "platforms")]
    pub category: Option<Category>,
    /// Use all 36 platforms.
    #[arg(long, conflicts_with_all = ["platforms", "category"])]
    pub all_platforms: bool,
    /// Comma-separated scenario families. Defaults to all seven.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub families: Vec<Family>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub trials: u32,
    /// Write one CSV state log per trial under `<out>/logs`.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Results CSV from `run`, or a table with algorithm,score,variance columns.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Override the penalty coefficient from the weight configuration.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Results CSV from `run`. Defaults to `<out>/results.csv`.
    #[arg(long)]
    pub results: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: quadbench::scenegen::ScenegenError| e.to_string())
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse()
}

fn parse_category(s: &str) -> Result<Category, String> {
    s.parse()
}

/// A bad argument detected after parsing; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version exit 0, parse failures 2.
            let code = e.exit_code();
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(code as u8);
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            eprintln!("run `quadbench --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
