use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use ahee_core::ahee::EvalContext;
use chrono::{DateTime, Duration, Utc};
use pbkdf2::pbkdf2_hmac;
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use super::compute::multiply_blobs;
use super::{StoreConfig, StoreError};
use crate::storage::BlobStore;
use crate::wire::object_id_of;

pub const MIN_PASSWORD_LEN: usize = 8;
const SALT_LEN: usize = 16;
const TOKEN_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub username: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AccountRecord {
    salt: String,
    hash: String,
    rounds: u32,
    created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub op: String,
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredObject {
    pub object_id: String,
    /// Every account that has uploaded these exact bytes.
    pub owners: BTreeSet<String>,
    pub size: u64,
    pub lineage: Option<Lineage>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Journal {
    accounts: BTreeMap<String, AccountRecord>,
    objects: BTreeMap<String, StoredObject>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionToken {
    pub token: String,
    pub username: String,
    pub expires_at: DateTime<Utc>,
}

/// Blob directory plus metadata journal. All journal mutations go through
/// one mutex and are committed by atomically replacing `journal.json`.
pub struct Store {
    config: StoreConfig,
    journal: Mutex<Journal>,
    sessions: Mutex<HashMap<String, SessionToken>>,
}

fn hash_password(password: &str, salt: &[u8], rounds: u32) -> [u8; 32] {
    let mut out = [0u8; 32];
    pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, rounds, &mut out);
    out
}

fn valid_object_id(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

fn write_atomic(dir: &Path, target: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(target).map_err(|e| e.error)?;
    Ok(())
}

impl Store {
    /// Opens (or initializes) the data directory and replays the journal.
    pub fn open(config: StoreConfig) -> Result<Self, StoreError> {
        fs::create_dir_all(config.data_dir.join("blobs"))?;
        let journal = match fs::read(config.data_dir.join("journal.json")) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::Journal(format!("unreadable journal: {e}")))?,
            Err(e) if e.kind() == ErrorKind::NotFound => Journal::default(),
            Err(e) => return Err(e.into()),
        };
        Ok(Store { config, journal: Mutex::new(journal), sessions: Mutex::new(HashMap::new()) })
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    fn blob_path(&self, id: &str) -> PathBuf {
        self.config.data_dir.join("blobs").join(id)
    }

    /// Applies `change` to a copy of the journal, persists it, then swaps it
    /// in. A failed write leaves memory untouched.
    fn commit<T>(
        &self,
        change: impl FnOnce(&mut Journal) -> Result<T, StoreError>,
    ) -> Result<T, StoreError> {
        let mut guard = self.journal.lock().expect("journal lock poisoned");
        let mut next = guard.clone();
        let out = change(&mut next)?;
        let bytes = serde_json::to_vec_pretty(&next).map_err(|e| StoreError::Journal(e.to_string()))?;
        write_atomic(&self.config.data_dir, &self.config.data_dir.join("journal.json"), &bytes)?;
        *guard = next;
        Ok(out)
    }

    pub fn register(&self, username: &str, password: &str) -> Result<Account, StoreError> {
        if username.trim().is_empty() {
            return Err(StoreError::EmptyUsername);
        }
        if password.chars().count() < MIN_PASSWORD_LEN {
            return Err(StoreError::WeakPassword);
        }
        let mut salt = [0u8; SALT_LEN];
        OsRng.fill_bytes(&mut salt);
        let rounds = self.config.pbkdf2_rounds;
        let hash = hash_password(password, &salt, rounds);
        let created_at = Utc::now();
        self.commit(|j| {
            if j.accounts.contains_key(username) {
                return Err(StoreError::Conflict(format!("user {username:?} exists")));
            }
            j.accounts.insert(
                username.to_owned(),
                AccountRecord { salt: hex::encode(salt), hash: hex::encode(hash), rounds, created_at },
            );
            Ok(())
        })?;
        Ok(Account { username: username.to_owned(), created_at })
    }

    /// Unknown users and wrong passwords fail identically, after the same
    /// amount of hashing work.
    pub fn login(&self, username: &str, password: &str) -> Result<SessionToken, StoreError> {
        let record = self.journal.lock().expect("journal lock poisoned").accounts.get(username).cloned();
        let ok = match record {
            Some(rec) => {
                let salt = hex::decode(&rec.salt).map_err(|e| StoreError::Journal(e.to_string()))?;
                hex::encode(hash_password(password, &salt, rec.rounds)) == rec.hash
            }
            None => {
                hash_password(password, &[0u8; SALT_LEN], self.config.pbkdf2_rounds);
                false
            }
        };
        if !ok {
            return Err(StoreError::Auth);
        }
        let mut raw = [0u8; TOKEN_LEN];
        OsRng.fill_bytes(&mut raw);
        let ttl = Duration::from_std(self.config.token_ttl).unwrap_or(Duration::MAX);
        let session = SessionToken {
            token: hex::encode(raw),
            username: username.to_owned(),
            expires_at: Utc::now() + ttl,
        };
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        let now = Utc::now();
        sessions.retain(|_, s| s.expires_at > now);
        sessions.insert(session.token.clone(), session.clone());
        Ok(session)
    }

    /// Resolves a bearer token to its username.
    pub fn authenticate(&self, token: &str) -> Result<String, StoreError> {
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        match sessions.get(token) {
            Some(s) if s.expires_at > Utc::now() => Ok(s.username.clone()),
            Some(_) => {
                sessions.remove(token);
                Err(StoreError::Auth)
            }
            None => Err(StoreError::Auth),
        }
    }

    fn put_object(&self, owner: &str, blob: &[u8], lineage: Option<Lineage>) -> Result<String, StoreError> {
        let id = object_id_of(blob);
        let path = self.blob_path(&id);
        // content-addressed: a concurrent writer of the same id writes the same bytes
        if !path.exists() {
            write_atomic(&self.config.data_dir.join("blobs"), &path, blob)?;
        }
        self.commit(|j| {
            if !j.accounts.contains_key(owner) {
                return Err(StoreError::Auth);
            }
            let entry = j.objects.entry(id.clone()).or_insert_with(|| StoredObject {
                object_id: id.clone(),
                owners: BTreeSet::new(),
                size: blob.len() as u64,
                lineage: None,
            });
            entry.owners.insert(owner.to_owned());
            if entry.lineage.is_none() {
                entry.lineage = lineage;
            }
            Ok(())
        })?;
        Ok(id)
    }

    pub fn upload(&self, owner: &str, blob: &[u8]) -> Result<String, StoreError> {
        self.put_object(owner, blob, None)
    }

    fn owned(&self, user: &str, id: &str) -> Result<StoredObject, StoreError> {
        if !valid_object_id(id) {
            return Err(StoreError::NotFound);
        }
        let journal = self.journal.lock().expect("journal lock poisoned");
        let obj = journal.objects.get(id).ok_or(StoreError::NotFound)?;
        if !obj.owners.contains(user) {
            return Err(StoreError::Forbidden);
        }
        Ok(obj.clone())
    }

    pub fn download(&self, user: &str, id: &str) -> Result<Vec<u8>, StoreError> {
        self.owned(user, id)?;
        match fs::read(self.blob_path(id)) {
            Ok(b) => Ok(b),
            Err(e) if e.kind() == ErrorKind::NotFound => Err(StoreError::NotFound),
            Err(e) => Err(e.into()),
        }
    }

    /// Stores the pairwise product of two of `user`'s ciphertext objects.
    /// Only p (via `ctx`) is known here; nothing is decrypted.
    pub fn compute_mul(&self, user: &str, id1: &str, id2: &str, ctx: &EvalContext) -> Result<String, StoreError> {
        let b1 = self.download(user, id1)?;
        let b2 = self.download(user, id2)?;
        let product = multiply_blobs(&b1, &b2, ctx)?;
        let lineage = Lineage { op: "mul".into(), parents: vec![id1.to_owned(), id2.to_owned()] };
        self.put_object(user, &product, Some(lineage))
    }

    pub fn object(&self, id: &str) -> Option<StoredObject> {
        self.journal.lock().expect("journal lock poisoned").objects.get(id).cloned()
    }

    pub fn account(&self, username: &str) -> Option<Account> {
        let journal = self.journal.lock().expect("journal lock poisoned");
        journal
            .accounts
            .get(username)
            .map(|r| Account { username: username.to_owned(), created_at: r.created_at })
    }
}

/// A [`BlobStore`] bound directly to an in-process [`Store`] as one user.
pub struct LocalClient {
    pub store: Arc<Store>,
    pub username: String,
}

impl BlobStore for LocalClient {
    fn upload(&self, blob: &[u8]) -> crate::Result<String> {
        Ok(self.store.upload(&self.username, blob)?)
    }

    fn download(&self, object_id: &str) -> crate::Result<Vec<u8>> {
        Ok(self.store.download(&self.username, object_id)?)
    }

    fn compute_mul(&self, id1: &str, id2: &str, ctx: &EvalContext) -> crate::Result<String> {
        Ok(self.store.compute_mul(&self.username, id1, id2, ctx)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration as StdDuration;

    fn config(dir: &Path) -> StoreConfig {
        StoreConfig { data_dir: dir.to_owned(), pbkdf2_rounds: 10, ..StoreConfig::default() }
    }

    fn store(dir: &Path) -> Store {
        Store::open(config(dir)).unwrap()
    }

    #[test]
    fn register_rules() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        assert_eq!(s.register("alice", "correct horse").unwrap().username, "alice");
        assert!(matches!(s.register("alice", "another password"), Err(StoreError::Conflict(_))));
        assert!(matches!(s.register("bob", "abc"), Err(StoreError::WeakPassword)));
        assert!(matches!(s.register("  ", "long enough"), Err(StoreError::EmptyUsername)));
    }

    #[test]
    fn passwords_are_not_persisted() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        s.register("alice", "correct horse").unwrap();
        let journal = fs::read_to_string(dir.path().join("journal.json")).unwrap();
        assert!(!journal.contains("correct horse"));
        assert!(journal.contains("salt"));
    }

    #[test]
    fn login_failures_are_indistinguishable() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        s.register("alice", "correct horse").unwrap();
        let token = s.login("alice", "correct horse").unwrap();
        assert_eq!(s.authenticate(&token.token).unwrap(), "alice");
        let wrong = s.login("alice", "wrong horse").unwrap_err();
        let unknown = s.login("mallory", "wrong horse").unwrap_err();
        assert_eq!(wrong.to_string(), unknown.to_string());
        assert_eq!(wrong.status(), unknown.status());
        assert!(s.authenticate("not-a-token").is_err());
    }

    #[test]
    fn tokens_expire() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = StoreConfig { token_ttl: StdDuration::from_millis(1), ..config(dir.path()) };
        let s = Store::open(cfg).unwrap();
        s.register("alice", "correct horse").unwrap();
        let token = s.login("alice", "correct horse").unwrap();
        std::thread::sleep(StdDuration::from_millis(20));
        assert!(matches!(s.authenticate(&token.token), Err(StoreError::Auth)));
    }

    #[test]
    fn objects_are_content_addressed_and_owned() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        s.register("alice", "correct horse").unwrap();
        s.register("bob", "battery staple").unwrap();
        let id = s.upload("alice", b"hello").unwrap();
        assert_eq!(id, object_id_of(b"hello"));
        assert_eq!(s.upload("alice", b"hello").unwrap(), id);
        assert_eq!(fs::read_dir(dir.path().join("blobs")).unwrap().count(), 1);
        assert_eq!(s.download("alice", &id).unwrap(), b"hello");
        assert!(matches!(s.download("bob", &id), Err(StoreError::Forbidden)));
        assert!(matches!(s.download("alice", &"0".repeat(64)), Err(StoreError::NotFound)));
        assert!(matches!(s.download("alice", "../journal.json"), Err(StoreError::NotFound)));
    }

    #[test]
    fn state_survives_restart() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let s = store(dir.path());
            s.register("alice", "correct horse").unwrap();
            s.upload("alice", b"persist me").unwrap()
        };
        let s = store(dir.path());
        assert!(s.account("alice").is_some());
        assert_eq!(s.download("alice", &id).unwrap(), b"persist me");
        assert!(s.login("alice", "correct horse").is_ok());
    }
}
