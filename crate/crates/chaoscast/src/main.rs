use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chaoscast::{csv, presets, run_experiment, run_suite, Error, ExperimentConfig, SavedModel, Suite};
use chaoscast_core::dynamics::{integrate, make_benchmark, NoiseConfig, SystemId};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chaoscast", version, about = "Chaotic time-series forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a benchmark system and write `t,x,y,z` CSV.
    Generate {
        #[arg(long)]
        system: SystemId,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Process-noise magnitude; 0 integrates the clean system.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run one experiment from a TOML file, or a built-in preset by id.
    Run {
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding the config.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run every experiment of a suite file (`paper` for the built-in suite).
    Suite {
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write the readout weights of a saved NG-RC model as CSV.
    InspectWeights {
        model: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print the built-in suite as TOML, or list its experiment ids.
    Presets {
        #[arg(long)]
        list: bool,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => Ok(csv::write(path, text)?),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Run(e.to_string())),
    }
}

fn load_experiment(arg: &str) -> Result<ExperimentConfig, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(preset) = presets::find(arg) {
            return Ok(preset);
        }
    }
    Ok(ExperimentConfig::load(path)?)
}

fn load_suite(arg: &str) -> Result<Suite, Failure> {
    let path = Path::new(arg);
    if arg == "paper" && !path.exists() {
        return Ok(presets::paper_suite());
    }
    Ok(Suite::load(path)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { system, steps, dt, noise, seed, out } => {
            let (spec, x0) = make_benchmark(system);
            let noise = (noise > 0.0).then_some(NoiseConfig { magnitude: noise, seed });
            let traj = integrate(&spec, x0, dt, steps, noise.as_ref()).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(out.as_deref(), &csv::trajectory_csv(&traj))
        }
        Command::Run { config, seed, out } => {
            let mut config = load_experiment(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let dir = out
                .or_else(|| config.output_dir.clone())
                .unwrap_or_else(|| Path::new("out").join(&config.experiment_id));
            let report = run_experiment(&config, &dir)?;
            let m = &report.metrics;
            println!(
                "{}: valid_time={} steps, lobes={}, bounded={}, in_box={}, train={:.3}s -> {}",
                config.experiment_id,
                m.valid_time_steps,
                m.lobe_sign_changes,
                m.bounded,
                m.in_box,
                m.train_wall_time_s,
                dir.display()
            );
            Ok(())
        }
        Command::Suite { suite, seed, out } => {
            let mut suite = load_suite(&suite)?;
            if let Some(seed) = seed {
                suite.experiments.iter_mut().for_each(|e| e.seed = seed);
            }
            let root = out.or_else(|| suite.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out/suite"));
            let entries = run_suite(&suite, &root)?;
            let failed = entries.iter().filter(|e| !e.succeeded()).count();
            println!("{} experiments, {failed} failed; summary in {}", entries.len(), root.join("summary.csv").display());
            for e in entries.iter().filter(|e| !e.succeeded()) {
                eprintln!("{}: {}", e.experiment_id, e.error.as_deref().unwrap_or(""));
            }
            if failed > 0 {
                return Err(Failure::Run(format!("{failed} experiment(s) failed")));
            }
            Ok(())
        }
        Command::InspectWeights { model, out } => match SavedModel::load(&model)? {
            SavedModel::Ngrc { model } => {
                let table = model.weights().map_err(|e| Failure::Run(e.to_string()))?;
                emit(out.as_deref(), &csv::weights_csv(&table))
            }
            _ => Err(Failure::Usage(format!("{}: not an NG-RC model", model.display()))),
        },
        Command::Presets { list } => {
            let suite = presets::paper_suite();
            let text = if list {
                suite.experiments.iter().map(|e| format!("{}\n", e.experiment_id)).collect()
            } else {
                suite.to_toml()
            };
            emit(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
