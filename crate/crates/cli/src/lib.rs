//! Library backing the `scalegauge` binary: configuration, the outcome
//! transmission protocol, experiment runners, and report emission. The
//! binary is a thin wrapper so integration tests can drive runs in-process.

pub mod config;
pub mod experiments;
pub mod protocol;
pub mod report;

pub use config::{
    default_config, CliError, CliResult, Experiment, ExperimentConfig, LatticeSpec,
    ObservableSpec, PacketSpec, PotentialSpec, ThetaSpec, Tolerances,
};
pub use experiments::run;
pub use protocol::{compare_outcomes, interpret, transmit, OutcomeState};
pub use report::{fmt_f64, Invariant, OutputFormat, Report, Table};

/// Seed override from the environment, if set and parseable.
pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var("SCALEGAUGE_SEED") {
        Ok(text) => {
            let seed = text
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("bad SCALEGAUGE_SEED `{text}`")))?;
            Ok(Some(seed))
        }
        Err(_) => Ok(None),
    }
}
