use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct InputFile {
    path: PathBuf,
    bytes: u64,
}

/// Run manifest written next to a command's outputs as
/// `<command>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct Manifest {
    command: String,
    version: &'static str,
    config: Value,
    config_hash: String,
    inputs: Vec<InputFile>,
    outputs: Vec<String>,
    counts: BTreeMap<String, Value>,
    timings_ms: BTreeMap<String, f64>,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

impl Manifest {
    pub fn new(command: &str, config: &impl Serialize) -> Manifest {
        let config = serde_json::to_value(config).expect("config serializes");
        let canonical = serde_json::to_vec(&config).expect("value serializes");
        Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: sha256_hex(&canonical),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
            clock: None,
        }
    }

    pub fn input(&mut self, path: &Path) {
        let bytes = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        self.inputs.push(InputFile {
            path: path.to_owned(),
            bytes,
        });
    }

    pub fn output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn count(&mut self, key: &str, value: impl Serialize) {
        self.counts
            .insert(key.into(), serde_json::to_value(value).expect("count serializes"));
    }

    /// Starts timing `stage`, closing the previous one.
    pub fn stage(&mut self, stage: &str) {
        self.stop();
        self.clock = Some((stage.into(), Instant::now()));
    }

    pub fn stop(&mut self) {
        if let Some((name, start)) = self.clock.take() {
            *self.timings_ms.entry(name).or_default() += start.elapsed().as_secs_f64() * 1e3;
        }
    }

    pub fn write(mut self, dir: &Path) -> Result<PathBuf, Failure> {
        self.stop();
        let path = dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
