use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Provenance attached to every output file. `started_unix` and
/// `wall_time_s` are the only fields that differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Arguments after the program name; re-running with them reproduces
    /// the file.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub seed: u64,
    pub started_unix: u64,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: &[String], config: &impl Serialize, seed: u64, started: Instant) -> Self {
        let wall = started.elapsed();
        let started_unix = SystemTime::now()
            .checked_sub(wall)
            .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_secs());
        Self {
            subcommand: subcommand.to_string(),
            args: args.to_vec(),
            config: serde_json::to_value(config).expect("config serializes"),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_unix,
            wall_time_s: wall.as_secs_f64(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}
