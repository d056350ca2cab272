//! Artifact writing. Every CSV starts with a `# config_hash=… seed=…` line and
//! every JSON document carries `config_hash` and `seed` members.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::CliError;

pub struct Output {
    dir: PathBuf,
    hash: String,
    seed: u64,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, cfg: &ExperimentConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf(), hash: cfg.hash(), seed: cfg.seed(), files: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    /// Writes the provenance line, then lets `body` write the CSV proper.
    pub fn csv<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let mut w = self.create(name)?;
        writeln!(w, "# config_hash={} seed={}", self.hash, self.seed)?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// CSV from a header and rows of already formatted cells.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.csv(name, |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(header)?;
            for r in rows {
                out.write_record(r)?;
            }
            out.flush()?;
            Ok(())
        })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let mut value = serde_json::to_value(body)?;
        if let Value::Object(map) = &mut value {
            map.insert("config_hash".into(), json!(self.hash));
            map.insert("seed".into(), json!(self.seed));
        }
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, &value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Run manifest: config (re-runnable with `--config`), hash, seed, versions,
    /// wall time, the files written and the outcome.
    pub fn manifest(mut self, command: &str, cfg: &ExperimentConfig, wall: f64, status: &str, code: i32) -> Result<PathBuf, CliError> {
        let name = format!("{command}.manifest.json");
        let files = self.files.clone();
        let m = json!({
            "command": command,
            "config_hash": self.hash,
            "seed": self.seed,
            "versions": {
                "stablerate-cli": env!("CARGO_PKG_VERSION"),
            },
            "wall_time_secs": wall,
            "outputs": files,
            "status": status,
            "exit_code": code,
            "config": cfg,
        });
        let mut w = self.create(&name)?;
        serde_json::to_writer_pretty(&mut w, &m)?;
        writeln!(w)?;
        w.flush()?;
        Ok(self.dir.join(name))
    }
}

/// Scientific-notation cell, so CSV numeric columns are reproducible byte for byte.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}
