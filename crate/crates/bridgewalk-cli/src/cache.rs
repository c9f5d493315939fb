//! Content-addressed table cache: one JSON file per config digest,
//! written atomically, keyed on the config content plus the code version.

use anyhow::{Context, Result};
use bridgewalk::enumerate::AggregateTableDto;
use bridgewalk::{enumerate_aggregate, AggregateTable, EnumConfig, Group};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub struct Cache {
    dir: PathBuf,
}

/// How an aggregate table was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Miss,
    Hit,
    /// Hit that was re-computed and byte-compared.
    HitAudited,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating cache dir {dir:?}"))?;
        Ok(Cache { dir })
    }

    pub fn key(cfg: &EnumConfig) -> String {
        let mut hasher = Sha256::new();
        hasher.update(cfg.digest().as_bytes());
        hasher.update(bridgewalk::CODE_VERSION.as_bytes());
        hex::encode(hasher.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Fetch or compute the aggregate table. With `audit_every = Some(n)`,
    /// one in `n` hits (chosen deterministically from the key) is recomputed
    /// and byte-compared against the stored payload.
    pub fn get_or_compute(
        &self,
        cfg: &EnumConfig,
        group: &Group,
        audit_every: Option<u64>,
    ) -> Result<(AggregateTable, CacheStatus)> {
        let key = Self::key(cfg);
        let path = self.path(&key);
        if path.exists() {
            let stored = fs::read_to_string(&path)?;
            let dto: AggregateTableDto =
                serde_json::from_str(&stored).context("corrupt cache payload")?;
            let table = AggregateTable::from_dto(&dto, group)
                .map_err(|e| anyhow::anyhow!("corrupt cache payload: {e}"))?;
            let audit = audit_every.is_some_and(|n| {
                n > 0 && u64::from(key.as_bytes()[0]) % n == 0
            });
            if audit {
                let fresh = enumerate_aggregate(cfg)?;
                let fresh_bytes = serde_json::to_string(&fresh.to_dto())?;
                if fresh_bytes != stored {
                    anyhow::bail!(
                        "cache audit failed for {key}: stored payload differs from a fresh computation"
                    );
                }
                return Ok((table, CacheStatus::HitAudited));
            }
            return Ok((table, CacheStatus::Hit));
        }
        let table = enumerate_aggregate(cfg)?;
        self.store(&key, &table)?;
        Ok((table, CacheStatus::Miss))
    }

    fn store(&self, key: &str, table: &AggregateTable) -> Result<()> {
        let payload = serde_json::to_string(&table.to_dto())?;
        let tmp = self.dir.join(format!("{key}.tmp"));
        fs::write(&tmp, payload)?;
        fs::rename(&tmp, self.path(key))?;
        Ok(())
    }
}

/// Resolve the cache directory: flag, then environment, then a local default.
pub fn cache_dir(flag: Option<&Path>, config_dir: &Path) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("BRIDGEWALK_CACHE_DIR") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    config_dir.join(".bridgewalk-cache")
}
