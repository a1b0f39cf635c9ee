use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chainstab_core::harness::config::{ExperimentConfig, SweepSource};
use chainstab_core::harness::figures::{emit_fig_data, FigureScenario};
use chainstab_core::harness::output::{csv_bytes, json_bytes, trajectory_csv_bytes, write_file};
use chainstab_core::harness::{run_simulation, run_sweep, verify_lemma, LEMMA_TOLERANCE};
use chainstab_core::properties::{self, DEFAULT_CASES, DEFAULT_SEED};
use chainstab_core::Error;
use clap::{Parser, Subcommand};
use serde::Serialize;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "chainstab", version, about = "Vehicle-chain simulator and string-stability falsification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain size and write the trajectory CSV and summary JSON
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Compare simulated ramp responses with the closed form
    VerifyLemma {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = LEMMA_TOLERANCE)]
        tolerance: f64,
    },
    /// Fit the growth exponent of the error metric over the configured chain sizes
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Evaluate the closed form instead of simulating
        #[arg(long)]
        oracle_only: bool,
    },
    /// Write plot data for a reference figure
    Figdata {
        #[arg(long)]
        scenario: FigureScenario,
        #[arg(long = "N")]
        chain_size: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the randomized property suites
    Properties {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: usize,
    },
}

fn print_json<V: Serialize + ?Sized>(value: &V) -> Result<(), Error> {
    std::io::stdout().write_all(&json_bytes(value)?)?;
    Ok(())
}

fn output_path(out_dir: &Path, configured: Option<&PathBuf>, default: &str) -> PathBuf {
    out_dir.join(configured.map_or(Path::new(default), PathBuf::as_path))
}

fn simulate(config: &Path, out_dir: &Path) -> Result<bool, Error> {
    let config = ExperimentConfig::load(config)?;
    let run = run_simulation(&config)?;
    let outputs = &config.outputs;
    let traj = output_path(out_dir, outputs.trajectory_csv.as_ref(), "trajectory.csv");
    write_file(&traj, &trajectory_csv_bytes(&run.records)?)?;
    let report = output_path(out_dir, outputs.report_json.as_ref(), "summary.json");
    write_file(&report, &json_bytes(&run.summary)?)?;
    if let Some(plot) = &outputs.plot_data {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            k: usize,
            e: f64,
        }
        let rows: Vec<Row> = run
            .errors
            .iter()
            .enumerate()
            .flat_map(|(n, e)| e.iter().enumerate().map(move |(j, &e)| Row { n, k: j + 1, e }))
            .collect();
        write_file(&out_dir.join(plot), &csv_bytes(&rows)?)?;
    }
    for w in &run.summary.warnings {
        eprintln!("warning: {w}");
    }
    print_json(&run.summary)?;
    Ok(true)
}

fn verify(config: &Path, tolerance: f64) -> Result<bool, Error> {
    if !(tolerance > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tolerance}")));
    }
    let config = ExperimentConfig::load(config)?;
    let reports = verify_lemma(&config, tolerance)?;
    if let Some(path) = &config.outputs.report_json {
        write_file(path, &json_bytes(&reports)?)?;
    }
    print_json(&reports)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn sweep(config: &Path, jobs: usize, oracle_only: bool) -> Result<bool, Error> {
    if jobs == 0 {
        return Err(Error::Parameter("--jobs must be at least 1".into()));
    }
    let config = ExperimentConfig::load(config)?;
    let source = if oracle_only { SweepSource::Oracle } else { config.sweep.source };
    let outcome = run_sweep(&config, jobs, source)?;
    if let Some(path) = &config.outputs.report_json {
        write_file(path, &json_bytes(&outcome)?)?;
    }
    print_json(&outcome)?;
    Ok(outcome.passed)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Simulate { config, out_dir } => simulate(&config, &out_dir),
        Command::VerifyLemma { config, tolerance } => verify(&config, tolerance),
        Command::Sweep { config, jobs, oracle_only } => sweep(&config, jobs, oracle_only),
        Command::Figdata { scenario, chain_size, out_dir } => {
            for path in emit_fig_data(scenario, chain_size, &out_dir)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Properties { seed, cases } => {
            let report = properties::run_all(seed, cases);
            print_json(&report)?;
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { EXIT_CONFIG } else { EXIT_FAIL })
        }
    }
}
