//! Experiment runner behind the `catmap` binary.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 vanishing projector
//! state, 3 invariant failure, 4 configuration error.

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use config::{Cli, Command, Suite};
use error::CliResult;

pub use error::{CliError, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, EXIT_OTHER, EXIT_VANISHING};

pub fn run(cli: &Cli) -> CliResult<()> {
    let file = config::load_file(&cli.global)?;
    let common = config::common(&cli.global, &file)?;
    match &cli.command {
        Command::Periods { q_max } => {
            commands::periods(&common, q_max.or(file.q_max).unwrap_or(commands::DEFAULT_Q_MAX))
        }
        Command::Propagator { n } => {
            let n = n.or(file.n).ok_or_else(|| CliError::Config("--n is required".into()))?;
            commands::propagator(&common, n)
        }
        Command::Eigenstate { state, cutoff, grid } => commands::eigenstate(
            &common,
            &config::state(state, &file)?,
            cutoff.or(file.cutoff).unwrap_or(commands::DEFAULT_CUTOFF),
            grid.or(file.grid),
        ),
        Command::Equidist { state, cutoff } => commands::equidist(
            &common,
            &config::state(state, &file)?,
            cutoff.or(file.cutoff).unwrap_or(commands::DEFAULT_CUTOFF),
        ),
        Command::Profile { state } => commands::profile(&common, &config::state(state, &file)?),
        Command::Wigner {
            state,
            cutoff,
            grid,
            basis,
        } => commands::wigner(
            &common,
            &config::state(state, &file)?,
            grid.or(file.grid),
            cutoff.or(file.cutoff),
            *basis,
        ),
        Command::EvenScan {
            k,
            sigma,
            threshold,
            all_j,
        } => {
            let k = k.or(file.k).ok_or_else(|| CliError::Config("--k is required".into()))?;
            commands::even_scan(
                &common,
                k,
                sigma.clone().or(file.sigmas.clone()),
                threshold.or(file.threshold),
                *all_j,
            )
        }
        Command::Verify { suite, n, k, q_max } => {
            let params = verify::VerifyParams {
                n: n.or(file.n),
                k: k.or(file.k).unwrap_or(verify::DEFAULT_K),
                q_max: q_max.or(file.q_max).unwrap_or(verify::DEFAULT_Q_MAX),
            };
            verify::verify(&common, suite.or(file.suite).unwrap_or(Suite::All), &params)
        }
    }
}
