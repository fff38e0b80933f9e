mod config;
mod describe;
mod error;
mod manifest;
mod plot;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatlab_core::analysis::{fit_exponent, TimeWindow};
use heatlab_core::HeatKernelSeries;
use log::{error, info};

use config::{ExperimentConfig, Kind};
use error::{CliError, Context};

#[derive(Debug, Parser)]
#[command(name = "heatlab", version, about = "Heat kernel experiments on fractal graphs and trap models")]
struct Cli {
    /// Output directory (overrides the config's `output`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for ensemble solves.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Print what a config would compute, without computing it.
    Describe { config: PathBuf },
    /// Run every exact-oracle check.
    OracleSuite,
    /// Plot a heat kernel CSV as a log-log SVG.
    Plot {
        series: PathBuf,
        /// Fit window lower end (defaults to the first time).
        #[arg(long)]
        fit_lo: Option<f64>,
        /// Fit window upper end (defaults to the last time).
        #[arg(long)]
        fit_hi: Option<f64>,
        /// Draw a dashed guide with this decay exponent.
        #[arg(long)]
        reference: Option<f64>,
    },
}

fn load(path: &Path, cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut config: ExperimentConfig = text.parse()?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    Ok(config)
}

fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("heatlab-out").join(config.kind.as_str()))
}

fn execute(config: &ExperimentConfig) -> Result<(), CliError> {
    let dir = output_dir(config);
    let manifest = run::run(config, &dir)?;
    for entry in &manifest.files {
        info!("wrote {} ({})", dir.join(&entry.path).display(), entry.description);
    }
    println!("{}", dir.join(manifest::MANIFEST_NAME).display());
    Ok(())
}

fn plot(series_path: &Path, cli: &Cli, lo: Option<f64>, hi: Option<f64>, reference: Option<f64>) -> Result<(), CliError> {
    let text = fs::read_to_string(series_path).map_err(CliError::io(series_path))?;
    let series = HeatKernelSeries::from_csv(&text).context(|| format!("reading {}", series_path.display()))?;
    let positive: Vec<f64> = series.points.iter().filter(|p| p.time > 0.0 && p.value > 0.0).map(|p| p.time).collect();
    let (first, last) = match (positive.first(), positive.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(CliError::Config(format!("{}: no positive points to plot", series_path.display()))),
    };
    let window = TimeWindow::new(lo.unwrap_or(first), hi.unwrap_or(last)).map_err(|e| CliError::Validation {
        field: "fit window".into(),
        reason: e.to_string(),
    })?;
    let fit = fit_exponent(&series, window).ok();
    let svg = run::series_plot(&series, fit.as_ref(), reference, &series.model).to_svg();
    let target = match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            dir.join(series_path.with_extension("svg").file_name().expect("file path"))
        }
        None => series_path.with_extension("svg"),
    };
    fs::write(&target, svg).map_err(CliError::io(&target))?;
    if let Some(f) = fit {
        info!("fitted slope {:.4} ± {:.4} on [{}, {}]", f.slope, f.stderr, window.lo, window.hi);
    }
    println!("{}", target.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Validation {
                field: "--jobs".into(),
                reason: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Run { config } => execute(&load(config, cli)?),
        Command::Describe { config } => {
            print!("{}", describe::describe(&load(config, cli)?)?);
            Ok(())
        }
        Command::OracleSuite => {
            let mut config: ExperimentConfig = format!("kind = \"{}\"", Kind::OracleSuite).parse()?;
            config.seed = cli.seed.unwrap_or(0);
            config.output = cli.out.clone();
            let result = execute(&config);
            let report = output_dir(&config).join("oracles.txt");
            if let Ok(text) = fs::read_to_string(&report) {
                print!("{text}");
            }
            result
        }
        Command::Plot {
            series,
            fit_lo,
            fit_hi,
            reference,
        } => plot(series, cli, *fit_lo, *fit_hi, *reference),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info })
        .parse_default_env()
        .format_timestamp(None)
        .init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            e.exit_code()
        }
    }
}
