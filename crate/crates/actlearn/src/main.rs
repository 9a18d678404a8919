use std::path::PathBuf;
use std::process::ExitCode;

use actlearn::commands::{self, QueryTimes};
use actlearn::config::{burgers_preset, swe_desk_preset, swe_full_preset};
use actlearn::{CliError, Overrides, RunConfig};
use actlearn_core::NormKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "actlearn", version, about = "Active-learning POD-KSNN surrogate models")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Single seed for the sampling comparison; replaces the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Norm of the relative errors: l1, l2 or linf.
    #[arg(long, global = true)]
    norm: Option<String>,
    /// Parameter-space kernel name, e.g. multiquadric or gaussian.
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// Parameter-space kernel shape factor.
    #[arg(long, global = true)]
    shape_factor: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Preset {
    Burgers,
    SweDesk,
    SweFull,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the full-order model and write snapshot files.
    Snapshots {
        /// Viscosities to solve; the whole candidate grid when omitted.
        #[arg(long = "parameter", value_name = "NU")]
        parameters: Vec<f64>,
        /// Also write the CSV mirror of every file.
        #[arg(long)]
        csv: bool,
    },
    /// Run the offline active-learning loop and store the surrogate.
    Train,
    /// Evaluate a stored surrogate.
    Query {
        /// Model file; defaults to model.json in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Query viscosity.
        #[arg(long)]
        mu: f64,
        /// Single query time.
        #[arg(long, conflicts_with = "times")]
        t: Option<f64>,
        /// Comma-separated query times; the training grid when neither is given.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// Compare against the full-order model.
        #[arg(long)]
        truth: bool,
    },
    /// Compare active learning with random and quasi-random sampling.
    CompareSampling {
        /// Random-sampling budget; repeatable.
        #[arg(long = "budget")]
        budgets: Vec<usize>,
    },
    /// Time the full-order model, the offline phase and online queries.
    Timings {
        /// Number of averaged runs.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Write a built-in study configuration to stdout.
    InitConfig {
        #[arg(long, value_enum)]
        preset: Preset,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply_overrides(&Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        norm: cli.norm.clone(),
        kernel: cli.kernel.clone(),
        shape_factor: cli.shape_factor,
    })?;
    Ok(cfg)
}

fn fmt_errors(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Snapshots { parameters, csv } => {
            let cfg = load_config(&cli)?;
            let ps = (!parameters.is_empty()).then(|| parameters.clone());
            let s = commands::cmd_snapshots(&cfg, ps, *csv)?;
            println!("wrote {} snapshot files to {}", s.files.len(), cfg.output_dir.display());
        }
        Command::Train => {
            let cfg = load_config(&cli)?;
            let s = commands::cmd_train(&cfg)?;
            let r = &s.report;
            println!(
                "initial {} selected {} eta_hat [{}]",
                r.initial_indices.len(),
                r.selected_indices.len(),
                fmt_errors(&r.energy_hat)
            );
            if r.tolerance_unreachable {
                println!("warning: candidates exhausted before the tolerance was met");
            }
            if r.iteration_cap_reached {
                println!("warning: iteration cap reached");
            }
            for e in &s.test_errors {
                println!(
                    "test {:.6e} {}: mean error {:.3e}, max {:.3e}, estimate {:.3e}",
                    e.parameter, e.component, e.mean_error, e.max_error, e.estimate
                );
            }
            println!("artifacts in {}", cfg.output_dir.display());
        }
        Command::Query {
            model,
            mu,
            t,
            times,
            truth,
        } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let model = model.clone().unwrap_or_else(|| out.join(commands::MODEL_FILE));
            let norm = match &cli.norm {
                Some(n) => Some(NormKind::from_name(n).ok_or_else(|| CliError::Config(format!("unknown norm `{n}`")))?),
                None => None,
            };
            let qt = match (t, times) {
                (Some(t), _) => QueryTimes::Single(*t),
                (None, Some(v)) => QueryTimes::List(v.clone()),
                (None, None) => QueryTimes::TrainingGrid,
            };
            let s = commands::cmd_query(&model, &[*mu], qt, *truth, norm, &out)?;
            println!("{} times, ranks {:?}", s.times.len(), s.ranks);
            if s.extrapolated {
                println!("warning: parameter outside the training range");
            }
            if let Some(e) = s.estimate {
                println!("estimated error {e:.3e}");
            }
            if let Some(errs) = &s.errors {
                for e in errs {
                    let mean = e.iter().sum::<f64>() / e.len() as f64;
                    let max = e.iter().copied().fold(0.0, f64::max);
                    println!("error: mean {mean:.3e}, max {max:.3e}");
                }
            }
        }
        Command::CompareSampling { budgets } => {
            let mut cfg = load_config(&cli)?;
            if !budgets.is_empty() {
                cfg.budgets = budgets.clone();
                cfg.validate()?;
            }
            let c = commands::cmd_compare_sampling(&cfg)?;
            for s in [
                actlearn::harness::Strategy::Active,
                actlearn::harness::Strategy::Random,
                actlearn::harness::Strategy::QuasiRandom,
            ] {
                println!("{}: max error {:.3e}", s.name(), c.max_error(s));
            }
        }
        Command::Timings { runs } => {
            let mut cfg = load_config(&cli)?;
            if let Some(r) = runs {
                cfg.timing_runs = *r;
                cfg.validate()?;
            }
            let r = commands::cmd_timings(&cfg)?;
            println!(
                "fom {:.4e} s, offline (excluding fom) {:.4e} s, online {:.4e} s, speedup {:.1}",
                r.mean_fom_seconds, r.mean_offline_learning_seconds, r.mean_online_seconds, r.speedup
            );
        }
        Command::InitConfig { preset } => {
            let cfg = match preset {
                Preset::Burgers => burgers_preset(),
                Preset::SweDesk => swe_desk_preset(),
                Preset::SweFull => swe_full_preset(),
            };
            println!("{}", cfg.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
