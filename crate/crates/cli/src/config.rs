//! Run configuration: defaults, an optional JSON file, and flag overrides,
//! applied in that order so flags win.
//!
//! Every command's settings are a serde struct. The layers are merged as JSON
//! objects before the final deserialization, so a config file may name any
//! subset of fields and unknown keys are rejected with their name.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use robrel::distributions::DistributionSpec;
use robrel::losses::LossKind;
use robrel::model::{ConceptClass, Hypothesis};

use crate::error::{CliError, CliResult};

/// Settings for `certify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyRun {
    /// Training CSV with header `x1,...,xd,label`.
    pub data: String,
    /// Query CSV with header `x1,...,xd`.
    pub points: String,
    /// Concept class; thresholds in one dimension and halfspaces otherwise
    /// when absent.
    pub class: Option<ConceptClass>,
    pub loss: LossKind,
    pub seed: u64,
}

impl Default for CertifyRun {
    fn default() -> Self {
        CertifyRun { data: String::new(), points: String::new(), class: None, loss: LossKind::ST, seed: 0 }
    }
}

/// Settings for `gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRun {
    pub hstar: Hypothesis,
    pub sampler: DistributionSpec,
    pub m: usize,
    pub seed: u64,
}

impl Default for GenRun {
    fn default() -> Self {
        GenRun {
            hstar: Hypothesis::Threshold { t: 0.0 },
            sampler: DistributionSpec::Gaussian { d: 1 },
            m: 100,
            seed: 0,
        }
    }
}

/// Identity of the running build: package versions, target, and profile.
pub fn fingerprint() -> String {
    let mut h = Sha256::new();
    for part in [
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        std::env::consts::ARCH,
        std::env::consts::OS,
        if cfg!(debug_assertions) { "debug" } else { "release" },
    ] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Text printed by `--version`.
pub fn version_line() -> String {
    format!("{} (build {})", env!("CARGO_PKG_VERSION"), fingerprint())
}

/// Merges `defaults`, the JSON object in `file` if any, and `overrides`.
pub fn resolve<T>(defaults: &T, file: Option<&Path>, overrides: Map<String, Value>) -> CliResult<T>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = match serde_json::to_value(defaults)? {
        Value::Object(m) => m,
        _ => unreachable!("run settings serialize as objects"),
    };
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(file_fields) = value else {
            return Err(CliError::Usage(format!("config {} must hold a JSON object", path.display())));
        };
        overlay(&mut merged, file_fields)?;
    }
    overlay(&mut merged, overrides)?;
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))
}

fn overlay(base: &mut Map<String, Value>, fields: Map<String, Value>) -> CliResult<()> {
    for (k, v) in fields {
        if !base.contains_key(&k) {
            let known: Vec<&str> = base.keys().map(String::as_str).collect();
            return Err(CliError::Usage(format!("unknown config field `{k}` (expected one of {})", known.join(", "))));
        }
        base.insert(k, v);
    }
    Ok(())
}

/// Collects `Some` flag values into an override object.
#[derive(Default)]
pub struct Overrides(Map<String, Value>);

impl Overrides {
    pub fn set<V: Serialize>(mut self, key: &str, value: Option<V>) -> Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("flag values serialize"));
        }
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}
