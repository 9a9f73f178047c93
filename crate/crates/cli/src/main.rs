use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scalegauge_cli::{
    default_config, env_seed, run, CliError, Experiment, ExperimentConfig, OutputFormat, Report,
};

/// Deterministic experiments for number-structure scaling on lattices.
#[derive(Parser)]
#[command(name = "scalegauge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file and write report files.
    Run {
        /// Experiment name: axioms, transport, path_independence,
        /// packet_scaling, momentum_gauge, energy_equation, region_L,
        /// protocol.
        experiment: String,
        /// Path to a JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report files.
        #[arg(long)]
        out: PathBuf,
        /// Report format: json, csv, or both.
        #[arg(long, default_value = "both")]
        format: String,
        /// Constant added to every theta field; reports are byte-identical
        /// under any value.
        #[arg(long, default_value_t = 0.0)]
        theta_shift: f64,
    },
    /// Run a named suite with built-in defaults and print its invariants.
    Verify {
        /// Suite name: an experiment name, or `all`.
        #[arg(long)]
        suite: String,
        /// Seed for the built-in config.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn print_invariants(report: &Report) {
    for inv in &report.invariants {
        let status = if inv.pass { "PASS" } else { "FAIL" };
        println!("{status} {}/{} residual={}", report.experiment, inv.name, inv.residual);
    }
}

fn run_command(command: Command) -> Result<bool, CliError> {
    let mut all_pass = true;
    match command {
        Command::Run { experiment, config, out, format, theta_shift } => {
            let experiment = Experiment::parse(&experiment)?;
            let format = OutputFormat::parse(&format)
                .ok_or_else(|| CliError::Config(format!("unknown format `{format}`")))?;
            let text = std::fs::read_to_string(&config)?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if let Some(seed) = env_seed()? {
                config.seed = seed;
            }
            let report = run(experiment, &config, theta_shift)?;
            let written = report.write(&out, format)?;
            print_invariants(&report);
            for name in written {
                println!("wrote {}", out.join(name).display());
            }
            all_pass &= report.all_pass();
        }
        Command::Verify { suite, seed } => {
            let seed = env_seed()?.unwrap_or(seed);
            let experiments: Vec<Experiment> = if suite == "all" {
                Experiment::ALL.to_vec()
            } else {
                vec![Experiment::parse(&suite)?]
            };
            for experiment in experiments {
                let config = default_config(experiment, seed);
                let report = run(experiment, &config, 0.0)?;
                print_invariants(&report);
                all_pass &= report.all_pass();
            }
        }
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
