use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gridsec::config::{default_scenario, parse_config, ScenarioConfig};
use gridsec::error::Result;
use gridsec::sweep::{emit_csv, parse_values, run_sweep, write_csv, Axis, ModeSelection, SweepFile, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "gridsec", version, about = "Outage, secrecy and cost sweeps for two-hop MIMO smart-grid links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a one-dimensional parameter sweep and write CSV.
    Sweep {
        /// Scenario file overlaid on the built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep file providing axis, values and mode.
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Swept parameter: rate_target, m_gateways, n_a, n_j, theta or k_blocks.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values.
        #[arg(long)]
        values: Option<String>,
        /// selection, analytic or both.
        #[arg(long)]
        mode: Option<String>,
        /// Output file; CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Check a scenario file and print the resolved configuration.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(default_scenario()),
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    config: Option<PathBuf>,
    sweep_file: Option<PathBuf>,
    axis: Option<String>,
    values: Option<String>,
    mode: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<usize>,
) -> Result<bool> {
    let mut base = load_config(config.as_ref())?;
    if let Some(seed) = seed {
        base.seed = seed;
    }
    if let Some(trials) = trials {
        base.trials = trials;
    }
    base.validate()?;

    let file = match &sweep_file {
        Some(p) => SweepFile::load(p)?,
        None => SweepFile::default(),
    };
    let axis: Axis = match axis {
        Some(a) => a.parse()?,
        None => file.axis.unwrap_or(Axis::RateTarget),
    };
    let values = match values {
        Some(v) => parse_values(&v)?,
        None => file.values.unwrap_or_else(|| vec![base.get(axis.name()).unwrap().parse().unwrap()]),
    };
    let modes: ModeSelection = match mode {
        Some(m) => m.parse()?,
        None => file.mode.unwrap_or_default(),
    };

    let spec = SweepSpec {
        axis,
        values,
        base,
        modes,
    };
    let report = run_sweep(&spec);
    for row in &report.rows {
        match &row.outcome {
            Ok((est, _)) => eprintln!(
                "{} = {}: {} p_outage {:.4} p_sec_block {:.4} ({:.2?})",
                axis,
                row.value,
                est.mode.as_str(),
                est.p_outage,
                est.p_sec_block,
                row.wall_time
            ),
            Err(msg) => eprintln!("{} = {}: failed: {msg}", axis, row.value),
        }
    }
    match out {
        Some(path) => emit_csv(&report, path)?,
        None => write_csv(&report, std::io::stdout().lock())?,
    }
    let clean = report.failures().next().is_none();
    Ok(clean)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep {
            config,
            sweep: sweep_file,
            axis,
            values,
            mode,
            out,
            seed,
            trials,
        } => sweep(config, sweep_file, axis, values, mode, out, seed, trials),
        Command::Validate { config } => load_config(config.as_ref()).map(|cfg| {
            print!("{}", cfg.to_file_string());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
