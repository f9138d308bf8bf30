//! Client-held per-object metadata, one JSON file per object.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VaultError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    /// Hex SHA-256 of the uploaded (post-outer-layer) blob.
    pub object_id: String,
    pub byte_len: u64,
    pub block_bytes: usize,
    /// Hex key fingerprint.
    pub fingerprint: String,
    pub outer_layer: String,
    pub created_at: DateTime<Utc>,
    pub label: String,
}

impl Manifest {
    /// Ciphertext pairs the referenced blob must hold.
    pub fn pair_count(&self) -> u64 {
        ahee_core::codec::block_count(self.byte_len, self.block_bytes)
    }
}

/// A directory of `<object_id>.json` files.
#[derive(Debug, Clone)]
pub struct ManifestStore {
    dir: PathBuf,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_hexdigit())
}

impl ManifestStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ManifestStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, object_id: &str) -> Result<PathBuf> {
        if !valid_id(object_id) {
            return Err(VaultError::ManifestMissing(object_id.to_owned()));
        }
        Ok(self.dir.join(format!("{object_id}.json")))
    }

    /// Atomically writes (or replaces) the manifest for `m.object_id`.
    pub fn save(&self, m: &Manifest) -> Result<()> {
        let path = self.path_for(&m.object_id)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, m).map_err(std::io::Error::from)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(&self, object_id: &str) -> Result<Manifest> {
        let path = self.path_for(object_id)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => {
                return Err(VaultError::ManifestMissing(object_id.to_owned()))
            }
            Err(e) => return Err(e.into()),
        };
        parse(&path, &bytes)
    }

    /// All manifests, oldest first.
    pub fn list(&self) -> Result<Vec<Manifest>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            out.push(parse(&path, &fs::read(&path)?)?);
        }
        out.sort_by(|a, b| (a.created_at, &a.object_id).cmp(&(b.created_at, &b.object_id)));
        Ok(out)
    }
}

fn parse(path: &Path, bytes: &[u8]) -> Result<Manifest> {
    serde_json::from_slice(bytes).map_err(|e| VaultError::ManifestCorrupt {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn manifest(id: &str, secs: i64) -> Manifest {
        Manifest {
            object_id: id.to_owned(),
            byte_len: 10,
            block_bytes: 3,
            fingerprint: "00".repeat(16),
            outer_layer: "identity".into(),
            created_at: Utc.timestamp_opt(secs, 0).unwrap(),
            label: format!("file-{id}"),
        }
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let store = ManifestStore::open(dir.path()).unwrap();
        let m = manifest("ab01", 100);
        store.save(&m).unwrap();
        assert_eq!(store.load("ab01").unwrap(), m);
        assert_eq!(m.pair_count(), 4);
    }

    #[test]
    fn list_in_creation_order() {
        let dir = tempfile::tempdir().unwrap();
        let store = ManifestStore::open(dir.path()).unwrap();
        store.save(&manifest("cc", 300)).unwrap();
        store.save(&manifest("aa", 100)).unwrap();
        store.save(&manifest("bb", 200)).unwrap();
        let ids: Vec<String> = store.list().unwrap().into_iter().map(|m| m.object_id).collect();
        assert_eq!(ids, ["aa", "bb", "cc"]);
    }

    #[test]
    fn last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let store = ManifestStore::open(dir.path()).unwrap();
        store.save(&manifest("aa", 100)).unwrap();
        let mut newer = manifest("aa", 100);
        newer.label = "renamed".into();
        store.save(&newer).unwrap();
        assert_eq!(store.list().unwrap(), vec![newer]);
    }

    #[test]
    fn missing_and_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = ManifestStore::open(dir.path()).unwrap();
        assert!(matches!(store.load("dead"), Err(VaultError::ManifestMissing(_))));
        assert!(matches!(store.load("../etc"), Err(VaultError::ManifestMissing(_))));
        fs::write(dir.path().join("beef.json"), b"{not json").unwrap();
        assert!(matches!(store.load("beef"), Err(VaultError::ManifestCorrupt { .. })));
        assert!(matches!(store.list(), Err(VaultError::ManifestCorrupt { .. })));
    }

    #[test]
    fn json_field_names() {
        let v = serde_json::to_value(manifest("aa", 0)).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["block_bytes", "byte_len", "created_at", "fingerprint", "label", "object_id", "outer_layer"]
        );
    }
}
