//! CSV output and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 17 significant digits, locale independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes a header and rows as LF-terminated CSV to `out`.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let file = fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), header, rows)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self { path: path.display().to_string(), sha256: sha256_file(path)? })
    }
}

/// Provenance record written next to each output as `<out>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileHash>,
    pub output: FileHash,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    /// Hashes `inputs` and `output` as they are on disk now.
    pub fn new(
        command: &str,
        parameters: BTreeMap<String, serde_json::Value>,
        inputs: &[&Path],
        output: &Path,
        wall_clock_seconds: f64,
    ) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            parameters,
            inputs: inputs.iter().map(|p| FileHash::of(p)).collect::<Result<Vec<_>>>()?,
            output: FileHash::of(output)?,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds,
        })
    }

    pub fn write(&self, output: &Path) -> Result<PathBuf> {
        let path = manifest_path(output);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
