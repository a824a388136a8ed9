use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use otfs_mbm::analysis::analyze_config;
use otfs_mbm::config::{parse_config, SimConfig};
use otfs_mbm::montecarlo::run_sweep;
use otfs_mbm::output::{rows_from, write_csv, write_csv_file, Provenance};
use otfs_mbm::presets::{self, PRESETS};
use otfs_mbm::selftest::run_selftest;

/// Link-level Monte Carlo simulator for OTFS-MBM, OTFS-SM and plain OTFS.
#[derive(Parser)]
#[command(name = "otfs-mbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run BER sweeps and write one CSV row per (scheme, SNR) point.
    Simulate(SimulateArgs),
    /// Print bits per frame, throughput vs BER and energy-saving tables.
    Analyze(Source),
    /// Run the built-in sanity checks.
    Selftest,
    /// List or print the built-in configurations.
    Presets(PresetsArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Built-in configuration (see `presets --list`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the results CSV. Without it the config's output path
    /// is used, or stdout if there is none.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "OTFS_MBM_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Trial cap per SNR point, overriding the config.
    #[arg(long)]
    max_trials: Option<u64>,
    /// Early-stop error count per SNR point, overriding the config (0 disables).
    #[arg(long)]
    min_bit_errors: Option<u64>,
}

#[derive(Args)]
struct PresetsArgs {
    /// List preset names and descriptions.
    #[arg(long, conflicts_with = "show")]
    list: bool,
    /// Print a preset's config file.
    #[arg(long, value_name = "NAME")]
    show: Option<String>,
}

fn load(source: &Source) -> anyhow::Result<(String, SimConfig)> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
            Ok((stem.to_string(), cfg))
        }
        (None, Some(name)) => Ok((name.clone(), presets::load(name)?)),
        (None, None) => bail!("one of --config or --preset is required"),
    }
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let (name, mut cfg) = load(&args.source)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = args.max_trials {
        cfg.max_trials = n;
    }
    if let Some(n) = args.min_bit_errors {
        cfg.min_bit_errors = n;
    }
    let plan = cfg.sweep_plan();
    let result = run_sweep(&plan, args.workers)?;
    for (r, t) in result.records.iter().zip(&result.elapsed) {
        eprintln!(
            "{:<28} {:>6} dB  ber {:.4e}  ({} errors / {} bits, {:.2?})",
            r.label,
            r.snr_db,
            r.ber(),
            r.bit_errors,
            r.bits_sent,
            t
        );
    }

    let rows = rows_from(&result);
    let provenance = Provenance {
        config_hash: cfg.hash.clone(),
        master_seed: cfg.master_seed,
    };
    let target = match (args.out, &cfg.output) {
        (Some(dir), _) => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(dir.join(format!("{name}.csv")))
        }
        (None, Some(path)) => Some(path.clone()),
        (None, None) => None,
    };
    match target {
        Some(path) => {
            write_csv_file(&path, &rows, Some(&provenance)).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&rows, Some(&provenance), stdout.lock())?;
        }
    }
    Ok(())
}

fn selftest() -> anyhow::Result<()> {
    let checks = run_selftest();
    let mut out = std::io::stdout().lock();
    for c in &checks {
        writeln!(out, "{} {:<22} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}

fn presets_cmd(args: PresetsArgs) -> anyhow::Result<()> {
    if let Some(name) = args.show {
        print!("{}", presets::find(&name)?.toml);
        return Ok(());
    }
    for p in PRESETS {
        println!("{:<6}  {}", p.name, p.description);
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Analyze(source) => {
            let (_, cfg) = load(&source)?;
            print!("{}", analyze_config(&cfg)?.render());
            Ok(())
        }
        Command::Selftest => selftest(),
        Command::Presets(args) => presets_cmd(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

