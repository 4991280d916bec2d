use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Everything that determines a run's output: the subcommand, its numeric
/// parameters and digests of the input files.
///
/// Output paths and thread counts are left out, so runs that differ only in
/// those produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: serde_json::Value,
    /// SHA-256 of each input file, by role.
    pub inputs: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(command: &str, params: &impl Serialize) -> Self {
        Self {
            command: command.to_string(),
            params: serde_json::to_value(params).expect("parameters serialise"),
            inputs: BTreeMap::new(),
        }
    }

    pub fn with_input(mut self, role: &str, contents: &[u8]) -> Self {
        self.inputs.insert(role.to_string(), hex(&Sha256::digest(contents)));
        self
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
