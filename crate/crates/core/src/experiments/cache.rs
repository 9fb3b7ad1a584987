//! On-disk result cache keyed by `(canonical group key, estimator settings, seed)`.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::pc::{estimate_pc, PcEstimate, PcSettings};
use crate::error::{Error, Result};
use crate::marked_group::MarkedAbelianGroup;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "ABELPERC_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex sha256 of the canonical key, the settings and the seed.
    pub fn key(group: &MarkedAbelianGroup, s: &PcSettings) -> String {
        let mut h = Sha256::new();
        h.update(b"estimate-pc\n");
        h.update(group.key().as_bytes());
        h.update(format!("\nwindow={} trials={} tol={:?} threshold={:?} drift={}\nseed={}", s.window, s.trials, s.tol, s.threshold, s.drift, s.seed).as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, group: &MarkedAbelianGroup, s: &PcSettings) -> Result<Option<PcEstimate>> {
        let path = self.path(&Self::key(group, s));
        match fs::read_to_string(&path) {
            Ok(text) => {
                let e: PcEstimate = serde_json::from_str(&text).map_err(|e| Error::pre(format!("corrupt cache entry {}: {e}", path.display())))?;
                Ok(Some(e))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes through a temporary file so concurrent readers never see a partial entry.
    pub fn put(&self, group: &MarkedAbelianGroup, s: &PcSettings, e: &PcEstimate) -> Result<()> {
        let key = Self::key(group, s);
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        let text = serde_json::to_string(e).map_err(|e| Error::pre(e.to_string()))?;
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.path(&key))?;
        Ok(())
    }
}

/// `estimate_pc` through an optional cache; the flag reports a hit.
pub fn cached_estimate(cache: Option<&Cache>, group: &MarkedAbelianGroup, s: &PcSettings) -> Result<(PcEstimate, bool)> {
    if let Some(c) = cache {
        if let Some(e) = c.get(group, s)? {
            return Ok((e, true));
        }
    }
    let e = estimate_pc(group, s);
    if let Some(c) = cache {
        c.put(group, s, &e)?;
    }
    Ok((e, false))
}
