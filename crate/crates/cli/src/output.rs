//! Output files with an embedded provenance header.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Written at the top of every CSV (as `#` comments) and under `meta` in every
/// JSON document. No wall-clock fields, so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// SHA-256 of each input file, in the order they were read.
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

impl Meta {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            tool: "annodyn".into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            seed,
            inputs: Vec::new(),
        }
    }

    /// Hashes `path` and records it under its file name.
    pub fn add_input(&mut self, path: &Path) -> Result<String> {
        let digest = sha256_file(path)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.inputs.push(InputDigest {
            name,
            sha256: digest.clone(),
        });
        Ok(digest)
    }

    pub fn csv_header(&self) -> String {
        let mut s = format!(
            "# tool: {} {}\n# command: {}\n",
            self.tool, self.version, self.command
        );
        match self.seed {
            Some(seed) => s.push_str(&format!("# seed: {seed}\n")),
            None => s.push_str("# seed: none\n"),
        }
        for i in &self.inputs {
            s.push_str(&format!("# input: {} sha256={}\n", i.name, i.sha256));
        }
        s
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// CSV writer whose file starts with the metadata comment block.
pub fn csv_writer(path: &Path, meta: &Meta) -> Result<csv::Writer<BufWriter<File>>> {
    let mut out = create(path)?;
    out.write_all(meta.csv_header().as_bytes())?;
    Ok(csv::Writer::from_writer(out))
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object with `meta` as its first key.
pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, &WithMeta { meta, body })?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Formats an optional float for CSV; absent values are empty cells.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
