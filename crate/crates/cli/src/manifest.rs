//! Run manifests: every file the tool writes is accompanied by a JSON record
//! of the exact inputs that produced it, so a run can be reproduced
//! bit-identically.

use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub code_version: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value, seed: u64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            parameters,
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            warning: None,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Write the manifest next to `output` as `<output>.manifest.json`.
    pub fn write_alongside(&self, output: &Path) -> std::io::Result<()> {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = output.with_file_name(name);
        self.write_to(&path)
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serialization cannot fail");
        std::fs::write(path, body + "\n")
    }
}
