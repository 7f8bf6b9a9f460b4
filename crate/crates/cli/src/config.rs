//! Command-line flags, the optional TOML config file, and their merge.
//!
//! Every flag is optional on the command line; a value missing there is taken
//! from the config file, then from the built-in default. The cache path may
//! also come from `CATMAP_CACHE`.

use std::path::{Path, PathBuf};

use catmap::states::Parity;
use catmap::CatMap;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_MATRIX: [i64; 4] = [2, 3, 1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Binary,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Arith,
    Unitarity,
    Egorov,
    Gauss,
    Structure,
    Vanishing,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "catmap", version, about = "Quantum cat map experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Matrix entries a,b,c,d of A = (a b; c d).
    #[arg(long, global = true, value_parser = parse_matrix, allow_hyphen_values = true)]
    pub matrix: Option<[i64; 4]>,
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for `eigenstate`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON-lines cache of period records.
    #[arg(long, global = true, env = "CATMAP_CACHE")]
    pub cache_path: Option<PathBuf>,
    /// Run the command's invariant checks and exit 3 if one fails.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of q, p_q, N'_q, T, n(N'_q) and branch.
    Periods {
        #[arg(long)]
        q_max: Option<u64>,
    },
    /// The propagator matrix at dimension N.
    Propagator {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Profile, equidistribution table and optional Wigner image of one state.
    Eigenstate {
        #[command(flatten)]
        state: StateArgs,
        /// Mode cutoff of the equidistribution table.
        #[arg(long)]
        cutoff: Option<i64>,
        /// Also write a Wigner image with this grid size.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Matrix elements <W(m)u, u> for 0 < |m| <= cutoff.
    Equidist {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        cutoff: Option<i64>,
    },
    /// Coordinates of one state.
    Profile {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Gaussian-smoothed Wigner grid.
    Wigner {
        #[command(flatten)]
        state: StateArgs,
        /// Mode cutoff; defaults to four smoothing widths.
        #[arg(long)]
        cutoff: Option<i64>,
        #[arg(long)]
        grid: Option<usize>,
        /// Use the basis vector e_j instead of the projector state.
        #[arg(long)]
        basis: bool,
    },
    /// Vanishing scan of the even family N = N'_{2k}.
    EvenScan {
        #[arg(long)]
        k: Option<u64>,
        /// Branches to scan; all t branches when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sigma: Option<Vec<i64>>,
        /// Support threshold; defaults to 0.4/sqrt(k).
        #[arg(long)]
        threshold: Option<f64>,
        /// Scan every j instead of the fixed classes plus controls.
        #[arg(long)]
        all_j: bool,
    },
    /// Invariant suites, summarized as JSON.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Dimension for the unitarity, Egorov and Gauss suites.
        #[arg(long)]
        n: Option<usize>,
        /// Even-family index for the structure and vanishing suites.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        q_max: Option<u64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long, value_parser = parse_parity)]
    pub parity: Option<Parity>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<i64>,
}

fn parse_matrix(s: &str) -> Result<[i64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected four comma-separated integers, got {s:?}"));
    }
    let mut out = [0i64; 4];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("{p:?} is not an integer"))?;
    }
    Ok(out)
}

fn parse_parity(s: &str) -> Result<Parity, String> {
    s.parse().map_err(|e: catmap::Error| e.to_string())
}

/// Keys accepted in the config file. Names match the long flags, except
/// `sigmas`, the branch list of `even-scan`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub matrix: Option<[i64; 4]>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_path: Option<PathBuf>,
    pub verify: Option<bool>,
    pub q_max: Option<u64>,
    pub n: Option<usize>,
    pub k: Option<u64>,
    pub parity: Option<Parity>,
    pub j: Option<usize>,
    pub sigma: Option<i64>,
    pub sigmas: Option<Vec<i64>>,
    pub cutoff: Option<i64>,
    pub grid: Option<usize>,
    pub threshold: Option<f64>,
    pub suite: Option<Suite>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<FileConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Settings shared by every command after merging flags and file.
#[derive(Debug, Clone)]
pub struct Common {
    pub map: CatMap,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_path: Option<PathBuf>,
    pub verify: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct StateSettings {
    pub k: u64,
    pub parity: Parity,
    pub j: usize,
    pub sigma: i64,
}

pub fn load_file(global: &GlobalArgs) -> CliResult<FileConfig> {
    match &global.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

pub fn common(global: &GlobalArgs, file: &FileConfig) -> CliResult<Common> {
    let [a, b, c, d] = global.matrix.or(file.matrix).unwrap_or(DEFAULT_MATRIX);
    let map = CatMap::new(a, b, c, d)?;
    Ok(Common {
        map,
        out: global.out.clone().or_else(|| file.out.clone()),
        format: global.format.or(file.format),
        cache_path: global.cache_path.clone().or_else(|| file.cache_path.clone()),
        verify: global.verify || file.verify.unwrap_or(false),
    })
}

pub fn state(args: &StateArgs, file: &FileConfig) -> CliResult<StateSettings> {
    let k = args
        .k
        .or(file.k)
        .ok_or_else(|| CliError::Config("--k is required".into()))?;
    Ok(StateSettings {
        k,
        parity: args.parity.or(file.parity).unwrap_or(Parity::Odd),
        j: args.j.or(file.j).unwrap_or(0),
        sigma: args.sigma.or(file.sigma).unwrap_or(0),
    })
}

pub fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}
