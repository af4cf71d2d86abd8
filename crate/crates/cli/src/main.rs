//! `robrel`: certificates, region masses, disagreement coefficients, and
//! contract checks from the command line.
//!
//! Every subcommand accepts `--config FILE` holding a JSON object of its
//! settings. Flags override the file, and the file overrides the defaults.
//! Artifacts embed the resolved settings and the build fingerprint, so a
//! rerun with the same settings reproduces them byte for byte.
//!
//! Exit status is 0 on success, 1 when `attack-verify` finds a violation,
//! and 2 for usage errors and failed runs.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use robrel::estimators::{Region, RegionConfig, ThetaConfig};
use robrel::losses::LossKind;
use robrel::reliability::{ContractConfig, Strategy};

use crate::config::{resolve, CertifyRun, GenRun, Overrides};
use crate::error::{CliError, CliResult, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "robrel", about = "Robustly-reliable certification and region estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct Common {
    /// JSON file with the command's settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Artifact path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Certificates for query points against a training set.
    Certify {
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        loss: Option<LossKind>,
        #[command(flatten)]
        common: Common,
    },
    /// Safely-reliable mass with a confidence interval.
    SrMass {
        #[command(flatten)]
        region: RegionFlags,
        #[arg(long)]
        loss: Option<LossKind>,
        #[command(flatten)]
        common: Common,
    },
    /// Source-to-target disagreement coefficient over a grid of radii.
    Theta {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reference_n: Option<usize>,
        #[arg(long)]
        directions: Option<usize>,
        #[arg(long)]
        force_empirical: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Reliable correctness under a shift from the training distribution.
    Shift {
        #[command(flatten)]
        region: RegionFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Attack the learner and check every issued certificate.
    AttackVerify {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        loss: Option<LossKind>,
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        no_constancy_check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Emit a synthetic labeled dataset.
    Gen {
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

/// Overrides for the region estimators.
#[derive(Args)]
struct RegionFlags {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
}

impl RegionFlags {
    fn overrides(&self) -> Overrides {
        Overrides::default()
            .set("m", self.m)
            .set("trials", self.trials)
            .set("n_test", self.n_test)
            .set("eta1", self.eta1)
            .set("eta2", self.eta2)
    }
}

/// A resolved subcommand, run inside the worker pool.
type Job = Box<dyn FnOnce(&Common) -> CliResult<i32> + Send>;

fn run(command: Command) -> CliResult<i32> {
    let (common, job): (Common, Job) = match command {
        Command::Certify { data, points, loss, common } => (
            common,
            Box::new(move |c: &Common| {
                let flags = Overrides::default().set("data", data).set("points", points).set("loss", loss);
                let cfg: CertifyRun = resolve(&CertifyRun::default(), c.config.as_deref(), seeded(flags, c))?;
                commands::run_certify(&cfg, c.out.as_deref())
            }),
        ),
        Command::SrMass { region, loss, common } => (
            common,
            Box::new(move |c: &Common| {
                let flags = region.overrides().set("region", loss.map(Region::SafelyReliable));
                let cfg: RegionConfig = resolve(&RegionConfig::default(), c.config.as_deref(), seeded(flags, c))?;
                commands::run_sr_mass(&cfg, c.out.as_deref())
            }),
        ),
        Command::Theta { epsilon, n, reference_n, directions, force_empirical, common } => (
            common,
            Box::new(move |c: &Common| {
                let flags = Overrides::default()
                    .set("epsilon", epsilon)
                    .set("n", n)
                    .set("reference_n", reference_n)
                    .set("directions", directions)
                    .set("force_empirical", force_empirical.then_some(true));
                let cfg: ThetaConfig = resolve(&ThetaConfig::default(), c.config.as_deref(), seeded(flags, c))?;
                commands::run_theta(&cfg, c.out.as_deref())
            }),
        ),
        Command::Shift { region, common } => (
            common,
            Box::new(move |c: &Common| {
                let defaults = RegionConfig { region: Region::Agreement, ..Default::default() };
                let cfg: RegionConfig = resolve(&defaults, c.config.as_deref(), seeded(region.overrides(), c))?;
                commands::run_shift(&cfg, c.out.as_deref())
            }),
        ),
        Command::AttackVerify { m, trials, budget, loss, strategy, no_constancy_check, common } => (
            common,
            Box::new(move |c: &Common| {
                let flags = Overrides::default()
                    .set("m", m)
                    .set("trials", trials)
                    .set("budget", budget)
                    .set("kind", loss)
                    .set("strategy", strategy)
                    .set("constancy_check", no_constancy_check.then_some(false));
                let cfg: ContractConfig = resolve(&ContractConfig::default(), c.config.as_deref(), seeded(flags, c))?;
                commands::run_attack_verify(&cfg, c.out.as_deref())
            }),
        ),
        Command::Gen { m, common } => (
            common,
            Box::new(move |c: &Common| {
                let flags = Overrides::default().set("m", m);
                let cfg: GenRun = resolve(&GenRun::default(), c.config.as_deref(), seeded(flags, c))?;
                commands::run_gen(&cfg, c.out.as_deref())
            }),
        ),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", common.jobs.unwrap_or(0))))?;
    pool.install(|| job(&common))
}

fn seeded(flags: Overrides, common: &Common) -> serde_json::Map<String, serde_json::Value> {
    flags.set("seed", common.seed).into_map()
}

fn main() {
    let version: &'static str = Box::leak(config::version_line().into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    };
    std::process::exit(code);
}
