// SPDX-License-Identifier: Apache-2.0

//! Merging of JSON config files with command-line flags. Flags win.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Keys are matched case-insensitively so that `"N"` and `"n"` agree.
fn lowercase_keys(map: Map<String, Value>) -> Map<String, Value> {
    map.into_iter().map(|(k, v)| (k.to_ascii_lowercase(), v)).collect()
}

pub fn load(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(lowercase_keys(map)),
        Ok(_) => Err(CliError::Invalid(format!("{}: config must be a JSON object", path.display()))),
        Err(e) => Err(CliError::Invalid(format!("{}: {}", path.display(), e))),
    }
}

/// Overlays the flags that were given on top of the config values and
/// decodes the result.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T, CliError> {
    let mut base = match config {
        Some(p) => load(p)?,
        None => Map::new(),
    };
    let given = match serde_json::to_value(flags).map_err(|e| CliError::Invalid(e.to_string()))? {
        Value::Object(map) => map,
        _ => Map::new(),
    };
    for (k, v) in given {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Invalid(format!("config: {}", e)))
}
