//! Checksummed JSON checkpoints, replaced atomically.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Record, SearchConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config_digest: String,
    pub config: SearchConfig,
    /// Every `d < next_d` has been scanned and its records are in `records`.
    pub next_d: u64,
    pub scanned: u64,
    pub records: Vec<Record>,
    pub complete: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    body: Checkpoint,
    checksum: String,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("checkpoint checksum mismatch (corrupt or edited)")]
    Checksum,
    #[error("checkpoint format version {0} is not supported")]
    Version(u32),
    #[error("checkpoint config does not match its own digest")]
    Digest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the fields that determine the output. Shard count and
/// checkpoint spacing are excluded, so either may change on resume.
pub fn config_digest(cfg: &SearchConfig) -> String {
    let canon = format!(
        "lo={};hi={};filter={};report={};step_budget={}",
        cfg.lo, cfg.hi, cfg.filter, cfg.report, cfg.step_budget
    );
    sha256_hex(canon.as_bytes())
}

fn checksum(body: &Checkpoint) -> Result<String, serde_json::Error> {
    Ok(sha256_hex(&serde_json::to_vec(body)?))
}

/// Write to a sibling temporary file, fsync, then rename over `path`.
pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<(), CheckpointError> {
    let env = Envelope { checksum: checksum(cp)?, body: cp.clone() };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = File::create(tmp)?;
        serde_json::to_writer_pretty(&mut f, &env)?;
        f.write_all(b"\n")?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let text = fs::read_to_string(path)?;
    let env: Envelope = serde_json::from_str(&text)?;
    if env.body.format_version != FORMAT_VERSION {
        return Err(CheckpointError::Version(env.body.format_version));
    }
    if checksum(&env.body)? != env.checksum {
        return Err(CheckpointError::Checksum);
    }
    if config_digest(&env.body.config) != env.body.config_digest {
        return Err(CheckpointError::Digest);
    }
    Ok(env.body)
}
