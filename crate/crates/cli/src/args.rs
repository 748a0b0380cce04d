use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Output directory override, below explicit flags and config files.
pub const OUT_ENV: &str = "FDPCORR_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "fdpcorr",
    version,
    about = "FDP of Benjamini-Hochberg under equi-correlated Gaussian noise"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic law of the FDP (JSON on stdout)
    Theory(TheoryArgs),
    /// Monte Carlo run at one m
    Simulate(SimulateArgs),
    /// Monte Carlo runs over a grid of m
    RateStudy(RateStudyArgs),
    /// Monte Carlo run of the oracle-transformed p-values at fixed rho
    Oracle(OracleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theory(_) => "theory",
            Command::Simulate(_) => "simulate",
            Command::RateStudy(_) => "rate-study",
            Command::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureKind {
    Bh,
    Fixed,
}

#[derive(Debug, Clone, Args)]
pub struct MixtureArgs {
    /// Proportion of true nulls, in (0, 1)
    #[arg(long)]
    pub pi0: f64,
    /// Alternative mean shift (> 0)
    #[arg(long)]
    pub mu: f64,
    /// Nominal BH level
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = ProcedureKind::Bh)]
    pub procedure: ProcedureKind,
    /// p-value threshold for `--procedure fixed`
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// Correlation sequence. At most one of these may be given.
#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct RhoArgs {
    /// Correlation at the simulated m: 0 means independence, (0, 1) fixed
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// rho_m = theta/m, theta >= -1
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// rho_m = c*m^(-gamma) with 0 < gamma < 1, given as `c,gamma`
    #[arg(long, value_name = "C,GAMMA")]
    pub rho_power: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long, env = OUT_ENV, default_value = "fdpcorr-out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Exit with status 3 when a tolerance check fails
    #[arg(long)]
    pub check: bool,
    /// Flat `key = value` file with flag names as keys
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub mixture: MixtureArgs,
    /// Case (i) with m*rho_m -> theta
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "case_ii",
        default_value_t = 0.0
    )]
    pub theta: f64,
    /// Case (ii): m*rho_m -> inf, rho_m -> 0
    #[arg(long)]
    pub case_ii: bool,
    /// Also write theory.json and config.json here
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub mixture: MixtureArgs,
    #[command(flatten)]
    pub rho: RhoArgs,
    /// Apply the oracle transform (needs --rho in (0, 1))
    #[arg(long)]
    pub oracle: bool,
    /// Also write the sample of replicate 0 as sample.csv
    #[arg(long)]
    pub dump_sample: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RateStudyArgs {
    /// Increasing list of m, at least 3 values
    #[arg(long, value_delimiter = ',', required = true)]
    pub m_grid: Vec<usize>,
    #[command(flatten)]
    pub mixture: MixtureArgs,
    #[command(flatten)]
    pub rho: RhoArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub mixture: MixtureArgs,
    /// Fixed correlation in (0, 1)
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub dump_sample: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Flag-name → value echo, readable back through `--config`.
pub type FlagMap = BTreeMap<String, String>;

fn put(map: &mut FlagMap, key: &str, value: impl ToString) {
    map.insert(key.to_string(), value.to_string());
}

impl MixtureArgs {
    fn echo(&self, map: &mut FlagMap) {
        put(map, "pi0", self.pi0);
        put(map, "mu", self.mu);
        if let Some(a) = self.alpha {
            put(map, "alpha", a);
        }
        put(
            map,
            "procedure",
            match self.procedure {
                ProcedureKind::Bh => "bh",
                ProcedureKind::Fixed => "fixed",
            },
        );
        if let Some(t) = self.threshold {
            put(map, "threshold", t);
        }
    }
}

impl RhoArgs {
    fn echo(&self, map: &mut FlagMap) {
        if let Some(r) = self.rho {
            put(map, "rho", r);
        }
        if let Some(t) = self.theta {
            put(map, "theta", t);
        }
        if let Some(p) = &self.rho_power {
            put(map, "rho-power", p);
        }
    }
}

impl RunArgs {
    // `out`, `workers` and `config` do not change results and are left out
    fn echo(&self, map: &mut FlagMap) {
        put(map, "replicates", self.replicates);
        put(map, "seed", self.seed);
    }
}

impl TheoryArgs {
    pub fn echo(&self) -> FlagMap {
        let mut map = FlagMap::new();
        self.mixture.echo(&mut map);
        if self.case_ii {
            put(&mut map, "case-ii", true);
        } else {
            put(&mut map, "theta", self.theta);
        }
        map
    }
}

impl SimulateArgs {
    pub fn echo(&self) -> FlagMap {
        let mut map = FlagMap::new();
        put(&mut map, "m", self.m);
        self.mixture.echo(&mut map);
        self.rho.echo(&mut map);
        if self.oracle {
            put(&mut map, "oracle", true);
        }
        self.run.echo(&mut map);
        map
    }
}

impl RateStudyArgs {
    pub fn echo(&self) -> FlagMap {
        let mut map = FlagMap::new();
        let grid: Vec<String> = self.m_grid.iter().map(ToString::to_string).collect();
        put(&mut map, "m-grid", grid.join(","));
        self.mixture.echo(&mut map);
        self.rho.echo(&mut map);
        self.run.echo(&mut map);
        map
    }
}

impl OracleArgs {
    pub fn echo(&self) -> FlagMap {
        let mut map = FlagMap::new();
        put(&mut map, "m", self.m);
        self.mixture.echo(&mut map);
        put(&mut map, "rho", self.rho);
        self.run.echo(&mut map);
        map
    }
}
