//! Run manifests: a JSON sidecar per invocation recording what was run on
//! which inputs. Timing lives here so model files stay reproducible.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliResult;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub params: serde_json::Value,
    /// Input path to SHA-256 hex digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub duration_secs: f64,
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Sidecar location for an output artifact.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Collects a run's bookkeeping while it executes.
pub struct Recorder {
    subcommand: String,
    params: serde_json::Value,
    threads: usize,
    start: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    seeds: Vec<u64>,
}

impl Recorder {
    pub fn new<P: Serialize>(subcommand: String, params: &P, threads: usize) -> Self {
        Self {
            subcommand,
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            threads,
            start: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            seeds: Vec::new(),
        }
    }

    /// Digest an input file. Call before reading it so the digest matches what was used.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    /// Write the manifest next to `primary`.
    pub fn finish(self, primary: &Path) -> CliResult<()> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            params: self.params,
            inputs: self.inputs,
            outputs: self.outputs,
            seeds: self.seeds,
            threads: self.threads,
            duration_secs: self.start.elapsed().as_secs_f64(),
        };
        let mut f = File::create(manifest_path(primary))?;
        serde_json::to_writer_pretty(&mut f, &manifest).map_err(io::Error::other)?;
        writeln!(f)?;
        Ok(())
    }
}
