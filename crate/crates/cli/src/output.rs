//! Artifact writing. Every file goes through [`OutDir`] so the manifest can
//! list it with its hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{hex_sha256, Loaded};
use crate::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

/// Shortest round-trip form, so equal values always print equal.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub struct OutDir {
    dir: PathBuf,
    verbose: bool,
    artifacts: Vec<(String, String)>,
}

impl OutDir {
    pub fn create(dir: &Path, verbose: bool) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(OutDir { dir: dir.to_path_buf(), verbose, artifacts: Vec::new() })
    }

    pub fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("[cfslab] {msg}");
        }
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.artifacts.push((name.to_string(), hex_sha256(bytes)));
        self.log(&format!("wrote {}", path.display()));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_manifest(&mut self, command: &str, loaded: &Loaded, threads: usize, summary: Value) -> CliResult<()> {
        let artifacts: Vec<Value> = self.artifacts.iter().map(|(f, h)| json!({ "file": f, "sha256": h })).collect();
        let manifest = json!({
            "command": command,
            "config_sha256": loaded.sha256,
            "seed": loaded.seed,
            "threads": threads,
            "units": "natural",
            "versions": {
                "cfslab": cfslab::VERSION,
                "cfslab-cli": env!("CARGO_PKG_VERSION"),
            },
            "artifacts": artifacts,
            "summary": summary,
        });
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.log(&format!("wrote {}", path.display()));
        Ok(())
    }
}
