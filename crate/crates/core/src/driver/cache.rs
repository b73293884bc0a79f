use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ir::{from_json, to_canonical_json, IrModule};
use crate::reports::CandidateReport;

/// Stage-1 results of one unit, keyed by everything they depend on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub unit: String,
    /// Hash of the pretty-printed AST.
    pub fingerprint: String,
    pub reports: Vec<CandidateReport>,
    /// IR module file, relative to the cache directory.
    pub ir: String,
}

#[derive(Clone, Debug)]
pub struct BuildCache {
    pub dir: PathBuf,
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

impl BuildCache {
    pub fn new(dir: PathBuf) -> Self {
        BuildCache { dir }
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Entry and IR module for `key`; any unreadable piece counts as a miss.
    pub fn get(&self, key: &str) -> Option<(CacheEntry, IrModule)> {
        let text = std::fs::read_to_string(self.entry_path(key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        if entry.key != key {
            return None;
        }
        let ir = from_json(&std::fs::read_to_string(self.dir.join(&entry.ir)).ok()?).ok()?;
        Some((entry, ir))
    }

    pub fn put(&self, entry: &CacheEntry, module: &IrModule) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        write_atomic(&self.dir.join(&entry.ir), &to_canonical_json(module))?;
        write_atomic(&self.entry_path(&entry.key), &crate::reports::to_json(entry))
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(tmp, path)
}
