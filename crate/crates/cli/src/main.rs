use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ttedopa_cli::commands::{self, ChainLengthArgs};
use ttedopa_cli::run::simulate;
use ttedopa_cli::{CliError, Preset};

#[derive(Parser)]
#[command(name = "ttedopa", version, about = "Finite-temperature open-system dynamics on thermalized chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chain coefficients as CSV `n, omega_n, kappa_n`.
    ChainCoeffs {
        /// `wscp`, `wscp-background` or a spectral-density JSON file.
        #[arg(long, default_value = "wscp")]
        density: String,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        #[arg(long, default_value_t = 100)]
        sites: usize,
        /// Map `J` itself instead of its thermalized extension.
        #[arg(long)]
        standard: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the coefficients as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Thermal occupations `n, occupation` of the standard chain.
    Occupation {
        #[arg(long, default_value = "wscp")]
        density: String,
        #[arg(long)]
        temperature: f64,
        #[arg(long, default_value_t = 50)]
        sites: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Chain length from the single-excitation walk.
    ChainLength {
        #[arg(long, default_value = "wscp")]
        density: String,
        #[arg(long)]
        temperature: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
        #[arg(long, default_value_t = 2000)]
        cap: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write `|alpha_n(t)|^2` here.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Sites of the profile chain; defaults to the estimate.
        #[arg(long)]
        profile_sites: Option<usize>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Evolve system and chains with TEBD.
    Simulate {
        /// Run configuration or a manifest of an earlier run.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Replaces the configured temperatures; repeatable.
        #[arg(long)]
        temperature: Vec<f64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact pure-dephasing coherence.
    DephasingOracle {
        #[arg(long, default_value = "wscp")]
        density: String,
        #[arg(long)]
        temperature: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact diagonalization of a small instance.
    EdOracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        temperature: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Largest absolute difference of one column of two CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        column: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ChainCoeffs {
            density,
            temperature,
            sites,
            standard,
            output,
            json,
        } => commands::chain_coeffs(
            &commands::load_density(&density)?,
            temperature,
            sites,
            standard,
            output.as_deref(),
            json.as_deref(),
        ),
        Command::Occupation {
            density,
            temperature,
            sites,
            output,
        } => commands::occupation(&commands::load_density(&density)?, temperature, sites, output.as_deref()),
        Command::ChainLength {
            density,
            temperature,
            t_max,
            threshold,
            cap,
            output,
            profile,
            profile_sites,
            samples,
        } => {
            let sd = commands::load_density(&density)?;
            commands::chain_length(ChainLengthArgs {
                density: &sd,
                kelvin: temperature,
                t_max,
                threshold,
                cap,
                output: output.as_deref(),
                profile: profile.as_deref(),
                profile_sites,
                samples,
            })
            .map(|_| ())
        }
        Command::Simulate {
            config,
            preset,
            temperature,
            threads,
            output,
        } => {
            let mut cfg = commands::load_config(config.as_deref(), preset)?;
            if !temperature.is_empty() {
                cfg.temperatures = temperature;
            }
            if let Some(t) = threads {
                cfg.evolution.threads = t;
            }
            let base = output
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("simulation.csv"));
            simulate(&cfg, &base).map(|_| ())
        }
        Command::DephasingOracle {
            density,
            temperature,
            t_max,
            dt,
            output,
        } => commands::dephasing_oracle(&commands::load_density(&density)?, temperature, t_max, dt, output.as_deref()),
        Command::EdOracle {
            config,
            temperature,
            output,
        } => {
            let mut cfg = commands::load_config(Some(&config), None)?;
            if !temperature.is_empty() {
                cfg.temperatures = temperature;
            }
            let base = output.unwrap_or_else(|| PathBuf::from("ed.csv"));
            commands::ed_oracle(&cfg, &base).map(|_| ())
        }
        Command::Compare { a, b, column } => commands::compare_files(&a, &b, &column).map(|_| ()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
