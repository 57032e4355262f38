//! Run manifests: the tool version, the full configuration the
//! command ran under, and a SHA-256 digest of every file it wrote.
//! Re-running a command with the manifest's configuration must
//! reproduce the digests exactly.

use crate::config_file;
use anyhow::{anyhow, bail, Context, Result};
use driveteach_core::RunConfig;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("digesting {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Writes `manifest-<command>.txt` into `out_dir`, digesting the
/// named files (paths relative to `out_dir`). Returns the manifest
/// path.
pub fn write(out_dir: &Path, command: &str, config: &RunConfig, files: &[&str]) -> Result<PathBuf> {
    let mut out = String::new();
    writeln!(out, "manifest command={command} version={}", env!("CARGO_PKG_VERSION"))?;
    for line in config_file::render(config).lines() {
        writeln!(out, "config {line}")?;
    }
    for file in files {
        writeln!(out, "digest {file} sha256={}", digest_file(&out_dir.join(file))?)?;
    }
    let path = out_dir.join(format!("manifest-{command}.txt"));
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub struct ManifestFile {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    /// (file name, sha256 hex digest) pairs in written order.
    pub digests: Vec<(String, String)>,
}

pub fn read(path: &Path) -> Result<ManifestFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut command = None;
    let mut version = None;
    let mut config_text = String::new();
    let mut digests = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (tag, rest) =
            line.split_once(' ').ok_or_else(|| anyhow!("malformed manifest line {line:?}"))?;
        match tag {
            "manifest" => {
                for token in rest.split_whitespace() {
                    match token.split_once('=') {
                        Some(("command", v)) => command = Some(v.to_string()),
                        Some(("version", v)) => version = Some(v.to_string()),
                        _ => bail!("unexpected manifest header token {token:?}"),
                    }
                }
            }
            "config" => {
                config_text.push_str(rest);
                config_text.push('\n');
            }
            "digest" => {
                let (file, hash) = rest
                    .split_once(" sha256=")
                    .ok_or_else(|| anyhow!("malformed digest line {line:?}"))?;
                digests.push((file.to_string(), hash.to_string()));
            }
            other => bail!("unexpected manifest record {other}"),
        }
    }
    Ok(ManifestFile {
        command: command.ok_or_else(|| anyhow!("manifest has no command"))?,
        version: version.ok_or_else(|| anyhow!("manifest has no version"))?,
        config: config_file::parse(&config_text)?,
        digests,
    })
}
