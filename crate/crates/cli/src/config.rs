use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Keys holding file paths; relative values in a config file resolve against its directory.
const PATH_KEYS: [&str; 2] = ["model", "mesh"];

/// Reads `config` (if any), overlays the non-null `overrides`, and type-checks the result.
pub fn load<P>(config: Option<&Path>, overrides: &impl Serialize) -> Result<P, Failure>
where
    P: DeserializeOwned + Serialize,
{
    let mut merged = match config {
        Some(path) => read_config::<P>(path)?,
        None => Map::new(),
    };
    let flags = serde_json::to_value(overrides).map_err(|e| Failure::Input(format!("command-line flags: {e}")))?;
    if let Value::Object(flags) = flags {
        for (k, v) in flags {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Input(format!("command-line flags: {e}")))
}

fn read_config<P: DeserializeOwned>(path: &Path) -> Result<Map<String, Value>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let located = |e: serde_json::Error| Failure::Input(format!("{}:{}: {e}", path.display(), e.line()));
    // Parsing into the typed struct first reports type errors and unknown keys with their line.
    serde_json::from_str::<P>(&text).map_err(located)?;
    let Value::Object(mut map) = serde_json::from_str::<Value>(&text).map_err(located)? else {
        return Err(Failure::Input(format!("{}:1: expected a JSON object", path.display())));
    };
    let base = path.parent().unwrap_or(Path::new(""));
    for key in PATH_KEYS {
        if let Some(Value::String(s)) = map.get(key) {
            let p = PathBuf::from(s);
            if p.is_relative() {
                map.insert(key.into(), Value::String(base.join(p).to_string_lossy().into_owned()));
            }
        }
    }
    Ok(map)
}

/// Canonical JSON of the effective configuration (keys sorted). The output directory is
/// left out so that relocated runs share a hash.
pub fn canonical(params: &impl Serialize) -> String {
    match serde_json::to_value(params) {
        Ok(Value::Object(mut map)) => {
            map.remove("out");
            Value::Object(map).to_string()
        }
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

pub fn hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
