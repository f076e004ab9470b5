use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vdhla::experiment::{presets, run_suite, ExperimentConfig, SuiteOptions};
use vdhla::markov::{self, TransitionMatrix};
use vdhla::selfish::sweep::{thresholds_json, write_rows_csv};
use vdhla::selfish::{presets as sweep_presets, run_sweep, SweepConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "vdhla",
    version,
    about = "Learning-automata experiments and selfish-mining sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run experiment configs: one CSV per (config, seed) plus summary.json.
    RunExperiment(RunArgs),
    /// Stationary distribution of a transition matrix file.
    SteadyState(SteadyArgs),
    /// Sweep the attacker share for each defense and report thresholds.
    SelfishSweep(SweepArgs),
    /// Parse and check configs, printing them normalized.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Use seeds 0..N instead of the configured ones.
    #[arg(long, value_name = "N")]
    seeds: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    parallelism: Option<usize>,
    /// Validate inputs without simulating.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Config files or directories of `.toml` configs.
    paths: Vec<PathBuf>,
    #[arg(long = "config", value_name = "PATH")]
    configs: Vec<PathBuf>,
    /// Built-in suite (repeatable).
    #[arg(long = "preset", value_name = "NAME")]
    presets: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SteadyArgs {
    /// Matrix file: one row per line, space-separated reals.
    path: Option<PathBuf>,
    #[arg(long = "config", value_name = "PATH", conflicts_with = "path")]
    config: Option<PathBuf>,
    /// Reward matrix (one row per chain state) for action-level averages.
    #[arg(long, value_name = "PATH")]
    reward: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    precision: usize,
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    path: Option<PathBuf>,
    #[arg(long = "config", value_name = "PATH", conflicts_with = "path")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "NAME", conflicts_with_all = ["path", "config"])]
    preset: Option<String>,
    /// Blocks per run, overriding the config.
    #[arg(long, value_name = "N")]
    blocks: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    paths: Vec<PathBuf>,
    #[arg(long = "config", value_name = "PATH")]
    configs: Vec<PathBuf>,
    /// Accepted for symmetry; validation never simulates.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<vdhla::Error> for Failure {
    fn from(e: vdhla::Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            report(&Failure::Config(first_line(&e.to_string())));
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match cli.command {
        Command::RunExperiment(args) => run_experiment(args),
        Command::SteadyState(args) => steady_state(args),
        Command::SelfishSweep(args) => selfish_sweep(args),
        Command::ValidateConfig(args) => validate_config(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(match f {
                Failure::Config(_) => EXIT_CONFIG,
                Failure::Runtime(_) => EXIT_RUNTIME,
            })
        }
    }
}

fn first_line(s: &str) -> String {
    s.lines()
        .next()
        .unwrap_or_default()
        .trim_start_matches("error: ")
        .to_string()
}

/// One JSON object on stderr: `{"error": "config" | "runtime", "message": ...}`.
fn report(f: &Failure) {
    let (kind, message) = match f {
        Failure::Config(m) => ("config", m),
        Failure::Runtime(m) => ("runtime", m),
    };
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "message": message })
    );
}

/// Files under `path` ending in `.toml`, sorted; a plain file is returned as is.
fn expand(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !path.is_dir() {
        if !path.exists() {
            return Err(Failure::Config(format!("{}: no such file", path.display())));
        }
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| io_failure(path, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    Ok(files)
}

fn seed_list(n: Option<u64>) -> Result<Option<Vec<u64>>, Failure> {
    match n {
        Some(0) => Err(Failure::Config("--seeds must be at least 1".into())),
        other => Ok(other.map(|n| (0..n).collect())),
    }
}

fn run_experiment(args: RunArgs) -> Outcome {
    let mut configs = Vec::new();
    for path in args.paths.iter().chain(&args.configs) {
        for file in expand(path)? {
            configs.push(ExperimentConfig::load(&file)?);
        }
    }
    for name in &args.presets {
        let suite = presets::by_name(name).ok_or_else(|| {
            Failure::Config(format!(
                "unknown preset {name:?}; known: {}",
                presets::NAMES.join(", ")
            ))
        })?;
        configs.extend(suite);
    }
    if configs.is_empty() {
        return Err(Failure::Config("no experiment configs given".into()));
    }
    let seeds = seed_list(args.common.seeds)?;
    for c in &configs {
        c.validate()?;
    }
    if args.common.dry_run {
        let trials: usize = configs
            .iter()
            .map(|c| seeds.as_ref().map_or(c.seeds.len(), Vec::len))
            .sum();
        println!("ok: {} configs, {trials} trials", configs.len());
        return Ok(());
    }
    let options = SuiteOptions {
        out_dir: Some(args.common.out.clone()),
        threads: args.common.parallelism,
        seeds,
    };
    let rows = run_suite(&configs, &options)?;
    println!(
        "{:<36} {:>8} {:>6} {:>10} {:>9} {:>10} {:>9} {:>8}",
        "name", "model", "seeds", "mean_tnr", "std_tnr", "mean_tnas", "std_tnas", "p_fav"
    );
    for r in rows {
        let s = &r.summary;
        let p = s
            .mean_p_favorable
            .map_or("-".to_string(), |p| format!("{p:.4}"));
        println!(
            "{:<36} {:>8} {:>6} {:>10.1} {:>9.1} {:>10.1} {:>9.1} {:>8}",
            r.name, r.automaton, r.seeds, s.mean_tnr, s.std_tnr, s.mean_tnas, s.std_tnas, p
        );
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn format_vector(v: &[f64], precision: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.precision$}")).collect();
    format!("[{}]", parts.join(", "))
}

fn steady_state(args: SteadyArgs) -> Outcome {
    let path = args
        .path
        .or(args.config)
        .ok_or_else(|| Failure::Config("a matrix file is required".into()))?;
    let matrix = TransitionMatrix::parse(&read(&path)?)?;
    let reward = match &args.reward {
        Some(p) => Some(parse_rows(&read(p)?)?),
        None => None,
    };
    let stationary = markov::steady_state(&matrix)?;
    let effective = match &reward {
        Some(r) => Some(markov::effective_stationary(&matrix, r)?),
        None => None,
    };
    if args.dry_run {
        println!("ok: {0}x{0} ergodic chain", matrix.size());
        return Ok(());
    }
    let mut text = format_vector(&stationary, args.precision);
    text.push('\n');
    if let Some(e) = effective {
        text.push_str(&format_vector(&e, args.precision));
        text.push('\n');
    }
    match args.out {
        Some(out) => fs::write(&out, text).map_err(|e| io_failure(&out, e))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|e| Failure::Config(format!("{x:?}: {e}")))
                })
                .collect()
        })
        .collect()
}

fn selfish_sweep(args: SweepArgs) -> Outcome {
    let mut config = match (&args.path, &args.config, &args.preset) {
        (Some(p), _, _) | (None, Some(p), _) => SweepConfig::load(p)?,
        (None, None, Some(name)) => sweep_presets::by_name(name).ok_or_else(|| {
            Failure::Config(format!(
                "unknown preset {name:?}; known: {}",
                sweep_presets::NAMES.join(", ")
            ))
        })?,
        (None, None, None) => {
            return Err(Failure::Config(
                "a sweep config or --preset is required".into(),
            ))
        }
    };
    if let Some(seeds) = seed_list(args.common.seeds)? {
        config.seeds = seeds;
    }
    if let Some(blocks) = args.blocks {
        config.total_blocks = blocks;
    }
    config.validate()?;
    if args.common.dry_run {
        let runs = config.defenses.len() * config.alphas.values().len() * config.seeds.len();
        println!("ok: {} defenses, {runs} runs", config.defenses.len());
        return Ok(());
    }
    let result = run_sweep(&config, args.common.parallelism)?;
    let dir = args.common.out.join(&config.name);
    fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    let csv_path = dir.join("sweep.csv");
    let file = fs::File::create(&csv_path).map_err(|e| io_failure(&csv_path, e))?;
    write_rows_csv(&result.rows, std::io::BufWriter::new(file))
        .map_err(|e| io_failure(&csv_path, e))?;
    let json_path = dir.join("thresholds.json");
    fs::write(&json_path, thresholds_json(&result.curves))
        .map_err(|e| io_failure(&json_path, e))?;
    for c in &result.curves {
        println!(
            "{:<24} {:<8} threshold {}",
            c.label, c.controller, c.threshold
        );
    }
    Ok(())
}

enum AnyConfig {
    Experiment(ExperimentConfig),
    Sweep(SweepConfig),
}

fn load_any(path: &Path) -> Result<AnyConfig, Failure> {
    let text = read(path)?;
    let value: toml::Table =
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let with_path = |e: vdhla::Error| Failure::Config(format!("{}: {e}", path.display()));
    if value.contains_key("defenses") {
        let c = SweepConfig::from_toml(&text).map_err(with_path)?;
        c.validate().map_err(with_path)?;
        Ok(AnyConfig::Sweep(c))
    } else {
        let c = ExperimentConfig::from_toml(&text).map_err(with_path)?;
        c.validate().map_err(with_path)?;
        Ok(AnyConfig::Experiment(c))
    }
}

fn validate_config(args: ValidateArgs) -> Outcome {
    let mut files = Vec::new();
    for p in args.paths.iter().chain(&args.configs) {
        files.extend(expand(p)?);
    }
    if files.is_empty() {
        return Err(Failure::Config("no config files given".into()));
    }
    let many = files.len() > 1;
    for file in files {
        let normalized = match load_any(&file)? {
            AnyConfig::Experiment(c) => c.to_toml(),
            AnyConfig::Sweep(c) => c.to_toml(),
        };
        if many {
            println!("# {}", file.display());
        }
        print!("{normalized}");
    }
    Ok(())
}
