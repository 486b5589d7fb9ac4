//! Run manifest: config echo, artifact hashes, tool version and timings.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

pub const FILE: &str = "manifest.json";
/// Empty file identifying an output directory this tool may clear.
pub const MARKER: &str = ".pme-tube-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

/// Collects checks and timings while a command runs.
pub struct Recorder {
    command: String,
    config: serde_json::Value,
    checks: Vec<Check>,
    timings: BTreeMap<String, f64>,
    started: Instant,
}

impl Recorder {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            config: serde_json::to_value(config)?,
            checks: Vec::new(),
            timings: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        let detail = detail.into();
        println!("{name}: {} {detail}", if passed { "PASS" } else { "FAIL" });
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    /// Runs `f`, recording its wall time under `phase`.
    pub fn timed<R>(&mut self, phase: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        self.timings.insert(phase.into(), t.elapsed().as_secs_f64());
        r
    }

    /// Hashes every file under `out`, writes the manifest there and verifies it.
    pub fn finish(mut self, out: &Path) -> Result<Manifest> {
        self.timings
            .insert("total".into(), self.started.elapsed().as_secs_f64());
        let passed = self.checks.iter().all(|c| c.passed);
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            config: self.config,
            artifacts: hash_tree(out)?,
            checks: self.checks,
            passed,
            timings: self.timings,
        };
        let path = out.join(FILE);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        verify(out)?;
        Ok(manifest)
    }
}

fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

fn hash_tree(out: &Path) -> Result<Vec<Artifact>> {
    let mut artifacts = Vec::new();
    for entry in WalkDir::new(out).sort_by_file_name() {
        let entry = entry.with_context(|| format!("listing {}", out.display()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(out)
            .expect("walk stays under its root");
        if rel == Path::new(FILE) || rel == Path::new(MARKER) {
            continue;
        }
        let (sha256, bytes) = sha256_file(entry.path())?;
        let path = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        artifacts.push(Artifact {
            path,
            sha256,
            bytes,
        });
    }
    Ok(artifacts)
}

/// Re-reads a written manifest and checks that every listed file exists
/// with the recorded hash.
pub fn verify(out: &Path) -> Result<Manifest> {
    let path = out.join(FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    for a in &manifest.artifacts {
        let (sha, bytes) = sha256_file(&out.join(&a.path))?;
        if sha != a.sha256 || bytes != a.bytes {
            bail!(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("hash mismatch for {}", a.path)
            ));
        }
    }
    Ok(manifest)
}
