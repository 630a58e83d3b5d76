use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hex SHA-256 of a file's bytes.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").unwrap();
    }
    Ok(out)
}

/// Structured-text record of one command invocation.
///
/// Rendered as sections of `key: value` lines:
///
/// ```text
/// [run]
/// command: fit
/// version: 0.1.0
/// input_sha256: …
/// [config]
/// …
/// [results]
/// …
/// ```
///
/// Wall time is included only when set, so reports are byte-identical
/// across runs by default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub input_digest: Option<String>,
    pub config: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
    pub wall_time_secs: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            version: crate::VERSION.to_string(),
            ..Default::default()
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn result(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.results.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("[run]\n");
        writeln!(out, "command: {}", self.command).unwrap();
        writeln!(out, "version: {}", self.version).unwrap();
        if let Some(s) = self.seed {
            writeln!(out, "seed: {s}").unwrap();
        }
        if let Some(d) = &self.input_digest {
            writeln!(out, "input_sha256: {d}").unwrap();
        }
        if let Some(t) = self.wall_time_secs {
            writeln!(out, "wall_time_secs: {t:.3}").unwrap();
        }
        for (title, items) in [("config", &self.config), ("results", &self.results)] {
            writeln!(out, "[{title}]").unwrap();
            for (k, v) in items {
                writeln!(out, "{k}: {v}").unwrap();
            }
        }
        out
    }
}
