//! Subcommand execution. Each command resolves its settings, runs the library
//! operation, and writes artifacts that embed the resolved settings and the
//! build fingerprint.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use robrel::estimators::{
    reliable_correctness, sr_mass, theta_pq, write_estimates_csv, EstimateRow, Region, RegionConfig, RegionEstimate,
    ThetaConfig,
};
use robrel::model::{read_dataset_csv, read_points_csv, write_dataset_csv, ConceptClass, Dataset};
use robrel::reliability::{certify, verify_contract, ContractConfig};
use robrel::version_space::fit_version_space;

use crate::config::{fingerprint, CertifyRun, GenRun};
use crate::error::{CliError, CliResult, EXIT_VIOLATION};

/// Reads a labeled CSV dataset, reporting a missing file as a usage error.
pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_dataset_csv(file)?)
}

/// Wrapper written around every JSON artifact.
#[derive(Serialize)]
struct Artifact<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    build: String,
    config: &'a C,
    result: R,
}

fn json_artifact<C: Serialize, R: Serialize>(command: &str, config: &C, result: R) -> CliResult<Vec<u8>> {
    let artifact = Artifact { command, build: fingerprint(), config, result };
    let mut bytes = serde_json::to_vec_pretty(&artifact)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

/// Sidecar path holding the settings behind a CSV artifact.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes a CSV artifact and, when it goes to a file, its sidecar.
fn emit_csv<C: Serialize, R: Serialize>(
    out: Option<&Path>,
    csv: &[u8],
    command: &str,
    config: &C,
    summary: R,
) -> CliResult<()> {
    emit(out, csv)?;
    if let Some(path) = out {
        emit(Some(&meta_path(path)), &json_artifact(command, config, summary)?)?;
    }
    Ok(())
}

pub fn run_certify(cfg: &CertifyRun, out: Option<&Path>) -> CliResult<i32> {
    if cfg.data.is_empty() || cfg.points.is_empty() {
        return Err(CliError::Usage("certify needs --data and --points".into()));
    }
    let s = load_dataset(Path::new(&cfg.data))?;
    let file = File::open(&cfg.points)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", cfg.points)))?;
    let (d, points) = read_points_csv(file)?;
    if d != s.dimension() {
        return Err(CliError::Usage(format!("points have {d} features but the data has {}", s.dimension())));
    }
    let class = cfg.class.clone().unwrap_or(if d == 1 { ConceptClass::Threshold } else { ConceptClass::Linear });
    let vs = fit_version_space(&s, &class, 0.0)?;
    let certs = points.iter().map(|z| certify(&vs, z, cfg.loss)).collect::<Result<Vec<_>, _>>()?;
    emit(out, &json_artifact("certify", cfg, certs)?)?;
    Ok(0)
}

fn estimate_row(quantity: &str, cfg: &RegionConfig, e: &RegionEstimate) -> EstimateRow {
    let loss = match cfg.region {
        Region::Agreement => "agreement".to_string(),
        Region::SafelyReliable(kind) => kind.name().to_string(),
    };
    EstimateRow {
        quantity: quantity.into(),
        class: cfg.class.name().into(),
        loss,
        eta1: cfg.eta1,
        eta2: cfg.eta2,
        m: cfg.m,
        d: cfg.hstar.dim(),
        trials: cfg.trials,
        n: e.n,
        mass: e.mass,
        ci_low: e.ci_low,
        ci_high: e.ci_high,
        seed: cfg.seed,
    }
}

fn run_region(quantity: &str, command: &str, cfg: &RegionConfig, out: Option<&Path>) -> CliResult<i32> {
    let e = if quantity == "sr_mass" { sr_mass(cfg)? } else { reliable_correctness(cfg)? };
    let mut csv = Vec::new();
    write_estimates_csv(&[estimate_row(quantity, cfg, &e)], &mut csv)?;
    emit_csv(out, &csv, command, cfg, &e)?;
    Ok(0)
}

pub fn run_sr_mass(cfg: &RegionConfig, out: Option<&Path>) -> CliResult<i32> {
    run_region("sr_mass", "sr-mass", cfg, out)
}

pub fn run_shift(cfg: &RegionConfig, out: Option<&Path>) -> CliResult<i32> {
    run_region("reliable_correctness", "shift", cfg, out)
}

pub fn run_theta(cfg: &ThetaConfig, out: Option<&Path>) -> CliResult<i32> {
    let t = theta_pq(cfg)?;
    let mut csv = String::from("r,mass,ratio\n");
    for p in &t.curve {
        csv.push_str(&format!("{:?},{:?},{:?}\n", p.r, p.mass, p.ratio));
    }
    emit_csv(out, csv.as_bytes(), "theta", cfg, &t)?;
    Ok(0)
}

pub fn run_attack_verify(cfg: &ContractConfig, out: Option<&Path>) -> CliResult<i32> {
    let report = verify_contract(cfg)?;
    emit(out, &json_artifact("attack-verify", cfg, &report)?)?;
    if report.violations > 0 {
        eprintln!("contract violated in {} of {} trials", report.violations, report.trials);
        return Ok(EXIT_VIOLATION);
    }
    Ok(0)
}

pub fn run_gen(cfg: &GenRun, out: Option<&Path>) -> CliResult<i32> {
    let pts = robrel::distributions::sample(&cfg.sampler, cfg.seed, cfg.m)?;
    let ds = Dataset::labeled_by(&cfg.hstar, pts)?;
    let mut csv = Vec::new();
    write_dataset_csv(&ds, &mut csv)?;
    emit_csv(out, &csv, "gen", cfg, ds.len())?;
    Ok(0)
}
