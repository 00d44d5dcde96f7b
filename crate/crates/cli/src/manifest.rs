//! Run manifests: every file the tool writes is accompanied by a
//! `<file>.manifest.json` recording the command, inputs, parameters, and
//! tool version needed to reproduce the run exactly.

use crate::json17::to_json_17;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub game_config_path: String,
    pub parameters: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
    pub rng_seed: Option<u64>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, game_config_path: &str) -> Self {
        Self {
            command: command.to_string(),
            game_config_path: game_config_path.to_string(),
            parameters: BTreeMap::new(),
            output_paths: Vec::new(),
            rng_seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Writes the manifest next to `output`, as `<output>.manifest.json`.
    pub fn write_next_to(&mut self, output: &Path) -> io::Result<()> {
        self.output_paths = vec![output.display().to_string()];
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = output.with_file_name(name);
        std::fs::write(path, to_json_17(self) + "\n")
    }
}
