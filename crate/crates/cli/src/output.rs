use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Sidecar written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a C,
    /// Command line that regenerates the output.
    pub rerun: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `body` to `out` (stdout when `None`) and, for files, the manifest.
pub fn emit<C: Serialize>(
    out: Option<&Path>,
    body: &[u8],
    command: &str,
    config: &C,
    rerun: String,
) -> anyhow::Result<()> {
    let Some(path) = out else {
        std::io::stdout().lock().write_all(body)?;
        return Ok(());
    };
    fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
    let manifest = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        rerun,
        sha256: sha256_hex(body),
        bytes: body.len(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    let mpath = manifest_path(path);
    fs::write(&mpath, json).with_context(|| format!("cannot write {}", mpath.display()))?;
    Ok(())
}

/// 17 significant digits, so every value parses back to the same `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json_body<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}
