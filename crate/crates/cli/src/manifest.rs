//! Run manifest written next to every set of outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub options: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch when the run started.
    pub started_at: u64,
    pub wall_time_ms: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            inputs: BTreeMap::new(),
            options: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: Vec::new(),
            started_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or_default()
                .as_secs(),
            wall_time_ms: 0,
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.inputs.insert(name.into(), path.display().to_string());
        self
    }

    pub fn option(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.options.insert(name.into(), value.to_string());
        self
    }

    pub fn write(&mut self, dir: &Path, outputs: &[&str], wall: Duration) -> std::io::Result<()> {
        self.outputs = outputs.iter().map(|s| s.to_string()).collect();
        self.wall_time_ms = wall.as_millis() as u64;
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}
