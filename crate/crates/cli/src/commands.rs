use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use quadbench::eval::{
    read_results_csv, results_csv, run_matrix_with, summarize, AlgorithmSpec, MatrixConfig, MatrixDocument,
    PlatformSpec, ScenarioSpec, SuccessMatrix, TrialKey,
};
use quadbench::kinodyn::{load_platform_dataset, subset_means, Category, PlatformRecord};
use quadbench::scenegen::{export_scene, validate_scene, ExportFormat, Family, Solvability};
use quadbench::scoring::{apply_penalty, rank, read_score_table, score_matrix, write_score_csv, ScoreReport, WeightConfig};
use quadbench::sim::{write_log_csv, TaskSpec, TrialResult};

use crate::{Cli, Command, GenArgs, PlatformArgs, ReportArgs, RunArgs, ScoreArgs, UsageError};

/// Platforms flown when `run` is given no platform selection: light and
/// heavy real frames, a research frame and a heavy virtual frame.
pub const DEFAULT_PLATFORMS: [&str; 4] = ["0.60kg-EMAX", "2.00kg-T-MOTOR", "0.98kg-EGO Planner DIY", "4.20kg-UAV 13"];

/// Published subset means `(TWR_max, α_xy_max, α_z_max)`.
const PUBLISHED_MEANS: [(Category, [f64; 3]); 2] =
    [(Category::Real, [2.30, 99.92, 7.17]), (Category::Virtual, [3.47, 824.20, 41.88])];

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => gen(cli, args),
        Command::Platforms(args) => platforms(args),
        Command::Run(args) => run(cli, args),
        Command::Score(args) => score(cli, args),
        Command::Report(args) => report(cli, args),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn config_path(cli: &Cli) -> PathBuf {
    cli.config.clone().unwrap_or_else(|| cli.out.join("weights.json"))
}

/// Loads the weight configuration, writing the defaults first if the file is absent.
fn weight_config(cli: &Cli) -> Result<WeightConfig> {
    let path = config_path(cli);
    if path.exists() {
        return WeightConfig::load(&path).with_context(|| format!("reading {}", path.display()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let config = WeightConfig::default();
    config.save(&path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote default weights to {}", path.display());
    Ok(config)
}

fn gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    if !(args.density.is_finite() && args.density > 0.0) {
        return Err(usage(format!("--density must be positive, got {}", args.density)));
    }
    let indices: Vec<u32> = match args.index {
        Some(i) => vec![i],
        None => (1..=10).collect(),
    };
    let radius = TaskSpec::default().vehicle_radius;
    for index in indices {
        let scene = args
            .family
            .generate(cli.seed, index)
            .with_context(|| format!("generating {} seed {} index {index}", args.family, cli.seed))?;
        let mut written = vec![export_scene(&scene, args.format, args.density, &cli.out)?];
        if args.format != ExportFormat::Json {
            written.push(export_scene(&scene, ExportFormat::Json, args.density, &cli.out)?);
        }
        let verdict = match validate_scene(&scene, radius) {
            Solvability::Solvable { path_length } => format!("solvable (path {path_length:.1} m)"),
            Solvability::Unsolvable => "UNSOLVABLE".to_string(),
        };
        let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
        println!("{}: {verdict}; {}", scene.file_stem(), files.join(", "));
    }
    Ok(())
}

fn platforms(args: &PlatformArgs) -> Result<()> {
    let all = load_platform_dataset();
    let mut rows: Vec<&PlatformRecord> =
        all.iter().filter(|p| args.category.is_none_or(|c| p.category == c)).collect();
    if let Some(name) = &args.name {
        rows.retain(|p| &p.name == name);
        if rows.is_empty() {
            return Err(usage(format!("no platform named `{name}`")));
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.stats {
        for (category, published) in PUBLISHED_MEANS {
            if args.category.is_some_and(|c| c != category) {
                continue;
            }
            let m = subset_means(&all, category);
            writeln!(
                out,
                "{}: {} platforms; mean TWR_max {:.2} (published {:.2}); mean alpha_xy_max {:.2} rad/s^2 \
                 (published {:.2}); mean alpha_z_max {:.2} rad/s^2 (published {:.2})",
                category.as_str(),
                m.count,
                m.twr_max,
                published[0],
                m.alpha_xy_max,
                published[1],
                m.alpha_z_max,
                published[2]
            )?;
        }
        return Ok(());
    }
    writeln!(out, "name,category,mass_kg,twr_max,alpha_xy_max,alpha_z_max")?;
    for p in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.name,
            p.category.as_str(),
            p.mass_kg,
            p.profile.twr_max,
            p.profile.alpha_xy_max,
            p.profile.alpha_z_max
        )?;
    }
    Ok(())
}

fn select_platforms(args: &RunArgs) -> Result<Vec<PlatformSpec>> {
    let all = load_platform_dataset();
    if args.all_platforms {
        return Ok(all.iter().map(PlatformSpec::from).collect());
    }
    if let Some(c) = args.category {
        return Ok(all.iter().filter(|p| p.category == c).map(PlatformSpec::from).collect());
    }
    let names: Vec<&str> = if args.platforms.is_empty() {
        DEFAULT_PLATFORMS.to_vec()
    } else {
        args.platforms.iter().map(String::as_str).collect()
    };
    names
        .iter()
        .map(|n| {
            all.iter().find(|p| p.name == *n).map(PlatformSpec::from).ok_or_else(|| usage(format!("no platform named `{n}`")))
        })
        .collect()
}

fn select_algorithms(names: &[String]) -> Result<Vec<AlgorithmSpec>> {
    let mut out: Vec<AlgorithmSpec> = Vec::new();
    for n in names {
        let spec = match n.as_str() {
            "straight" => AlgorithmSpec::straight(),
            "reference" => AlgorithmSpec::reference(),
            other => return Err(usage(format!("unknown algorithm `{other}` (expected straight or reference)"))),
        };
        if out.iter().any(|a| a.name == spec.name) {
            return Err(usage(format!("algorithm `{n}` listed twice")));
        }
        out.push(spec);
    }
    if out.is_empty() {
        return Err(usage("no algorithms selected"));
    }
    Ok(out)
}

/// File-name-safe form of a platform or scenario name.
fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn run(cli: &Cli, args: &RunArgs) -> Result<()> {
    let algorithms = select_algorithms(&args.algorithms)?;
    let platforms = select_platforms(args)?;
    let mut families = args.families.clone();
    if families.is_empty() {
        families = Family::ALL.to_vec();
    }
    families.dedup();
    let scenarios: Vec<ScenarioSpec> = families.iter().map(|f| ScenarioSpec::generated(*f)).collect();
    weight_config(cli)?;
    fs::create_dir_all(&cli.out)?;

    let mut config = MatrixConfig::new(args.trials, cli.seed);
    config.trial_options.record_log = args.log;
    let log_dir = cli.out.join("logs");
    let log_error: Mutex<Option<anyhow::Error>> = Mutex::new(None);
    let sink = |key: &TrialKey<'_>, result: &TrialResult| {
        if !args.log {
            return;
        }
        let dir = log_dir.join(slug(key.algorithm)).join(slug(key.scenario)).join(slug(key.platform));
        let written = fs::create_dir_all(&dir)
            .and_then(|()| fs::File::create(dir.join(format!("trial_{:03}.csv", key.trial))))
            .and_then(|f| write_log_csv(&result.log, io::BufWriter::new(f)));
        if let Err(e) = written {
            log_error.lock().expect("log error lock").get_or_insert(anyhow::Error::new(e).context("writing trial log"));
        }
    };
    println!(
        "running {} algorithm(s) x {} scenario(s) x {} platform(s) x {} trial(s), seed {}",
        algorithms.len(),
        scenarios.len(),
        platforms.len(),
        args.trials,
        cli.seed
    );
    let matrix = run_matrix_with(&algorithms, &platforms, &scenarios, &config, &sink)?;
    if let Some(e) = log_error.into_inner().expect("log error lock") {
        return Err(e);
    }

    let results = cli.out.join("results.csv");
    fs::write(&results, results_csv(&matrix, cli.seed)?)?;
    fs::write(cli.out.join("matrix.json"), MatrixDocument::from_matrix(&matrix).to_json()?)?;
    print_matrix(&matrix);
    println!("wrote {} and matrix.json", results.display());
    Ok(())
}

/// Mean rate per algorithm and scenario over platforms, plus unsolvable-scene notes.
fn print_matrix(matrix: &SuccessMatrix) {
    let [na, ns, nm] = matrix.shape();
    println!("{:<12} {:<16} {:>8}", "algorithm", "scenario", "mean S");
    for a in 0..na {
        for s in 0..ns {
            let rates: Vec<f64> = (0..nm).filter_map(|m| matrix.rate(a, s, m)).collect();
            let shown = if rates.is_empty() {
                "missing".to_string()
            } else {
                format!("{:.3}", rates.iter().sum::<f64>() / rates.len() as f64)
            };
            println!("{:<12} {:<16} {:>8}", matrix.algorithms[a], matrix.scenarios[s].name, shown);
        }
    }
    for s in 0..ns {
        let unsolvable: u32 = (0..na).flat_map(|a| (0..nm).map(move |m| (a, m))).filter_map(|(a, m)| matrix.cell(a, s, m)).map(|c| c.unsolvable_trials).sum();
        if unsolvable > 0 {
            println!("note: {} trials of {} flew scenes that failed validation", unsolvable, matrix.scenarios[s].name);
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim().is_empty() {
        bail!("{} is empty", path.display());
    }
    Ok(text)
}

fn score(cli: &Cli, args: &ScoreArgs) -> Result<()> {
    let mut config = weight_config(cli)?;
    if let Some(beta) = args.beta {
        if !(0.0..=1.0).contains(&beta) {
            return Err(usage(format!("--beta must lie in [0, 1], got {beta}")));
        }
        config = config.with_beta(beta);
    }
    let path = args.results.clone().unwrap_or_else(|| cli.out.join("results.csv"));
    let text = read_input(&path)?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').map(str::trim).collect();
    let report: ScoreReport = if header.contains(&"success_rate") {
        let matrix = read_results_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
        score_matrix(&matrix, &config)?
    } else if header.contains(&"score") && header.contains(&"variance") {
        let rows = read_score_table(text.as_bytes()).with_context(|| format!("parsing {}", path.display()))?;
        apply_penalty(rows, config.beta)?
    } else {
        bail!("{}: expected a results CSV or a score table, header was `{}`", path.display(), header.join(","));
    };

    fs::create_dir_all(&cli.out)?;
    let out_path = cli.out.join("scores.csv");
    write_score_csv(&report, fs::File::create(&out_path)?)?;
    println!("{:>4}  {:<28} {:>8} {:>9} {:>11}", "rank", "algorithm", "score", "variance", "final_score");
    let ranked = rank(&report);
    for r in &ranked {
        let mark = if r.reference_only { "†" } else { "" };
        println!(
            "{:>4}  {:<28} {:>8.2} {:>9.3} {:>11.2}",
            r.rank,
            format!("{}{mark}", r.entry.algorithm),
            r.entry.score,
            r.entry.variance,
            r.entry.final_score
        );
    }
    for r in ranked.iter().filter(|r| r.reference_only) {
        println!(
            "† {}: reference only, missing scenarios {}",
            r.entry.algorithm,
            r.entry.excluded_scenarios.join(", ")
        );
    }
    for r in ranked.iter().filter(|r| r.entry.masked_cells > 0) {
        println!("note: {}: {} missing cells masked out of the weighted sums", r.entry.algorithm, r.entry.masked_cells);
    }
    println!("beta {}; wrote {}", report.beta, out_path.display());
    Ok(())
}

fn report(cli: &Cli, args: &ReportArgs) -> Result<()> {
    let path = args.results.clone().unwrap_or_else(|| cli.out.join("results.csv"));
    let text = read_input(&path)?;
    let matrix = read_results_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
    let reports = summarize(&matrix, cli.seed)?;
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join("per_scenario.csv"), reports.per_scenario_csv())?;
    fs::write(cli.out.join("per_platform.csv"), reports.per_platform_csv())?;
    for h in &reports.heatmaps {
        fs::write(cli.out.join(format!("heatmap_{}.csv", slug(&h.algorithm))), h.to_csv())?;
    }
    fs::write(cli.out.join("report.json"), reports.to_json()?)?;
    println!("{:<12} {:<16} {:>6} {:>17}", "algorithm", "scenario", "mean", "95% CI");
    for r in &reports.per_scenario {
        match (r.mean, r.ci_lower, r.ci_upper) {
            (Some(m), Some(lo), Some(hi)) => {
                println!("{:<12} {:<16} {:>6.3} {:>17}", r.algorithm, r.key, m, format!("[{lo:.3}, {hi:.3}]"))
            }
            _ => println!("{:<12} {:<16} {:>6} {:>17}", r.algorithm, r.key, "-", "missing"),
        }
    }
    println!("wrote per_scenario.csv, per_platform.csv, heatmaps and report.json to {}", cli.out.display());
    Ok(())
}
