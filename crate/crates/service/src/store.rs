//! File-backed documents: `instances/<id>.json`, `proposals/<id>.json` and
//! cached baseline schedules under `schedules/`.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rcpsp_relax::format::{from_json, to_json};
use rcpsp_relax::model::ProblemInstance;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::ServiceError;

/// Hex characters kept from the SHA-256 digest.
pub const ID_LEN: usize = 16;

pub fn content_id(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(digest)[..ID_LEN].to_string()
}

fn is_id(id: &str) -> bool {
    id.len() == ID_LEN && id.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
}

pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for sub in ["instances", "proposals", "schedules"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Store { root, locks: Mutex::new(HashMap::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Exclusive access token for one document id.
    pub fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    fn path(&self, dir: &str, id: &str) -> Result<PathBuf, ServiceError> {
        if !is_id(id) {
            return Err(ServiceError::NotFound(format!("{dir} `{id}`")));
        }
        Ok(self.root.join(dir).join(format!("{id}.json")))
    }

    /// Stores the instance under the hash of its canonical form.
    pub fn put_instance(&self, instance: &ProblemInstance) -> Result<String, ServiceError> {
        let text = to_json(instance);
        let id = content_id(text.as_bytes());
        let path = self.path("instances", &id)?;
        if !path.exists() {
            write_atomic(&path, text.as_bytes())?;
        }
        Ok(id)
    }

    pub fn get_instance(&self, id: &str) -> Result<ProblemInstance, ServiceError> {
        let path = self.path("instances", id)?;
        let text = read(&path).ok_or_else(|| ServiceError::NotFound(format!("instance `{id}`")))?;
        from_json(&text).map_err(|e| ServiceError::Internal(format!("stored instance `{id}` is corrupt: {e}")))
    }

    pub fn get_doc<T: DeserializeOwned>(&self, dir: &str, id: &str) -> Result<Option<T>, ServiceError> {
        let path = self.path(dir, id)?;
        match read(&path) {
            None => Ok(None),
            Some(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| ServiceError::Internal(format!("stored {dir} `{id}` is corrupt: {e}"))),
        }
    }

    pub fn put_doc<T: Serialize>(&self, dir: &str, id: &str, doc: &T) -> Result<(), ServiceError> {
        let path = self.path(dir, id)?;
        let mut text = serde_json::to_vec_pretty(doc).map_err(|e| ServiceError::Internal(e.to_string()))?;
        text.push(b'\n');
        write_atomic(&path, &text)
    }
}

fn read(path: &Path) -> Option<String> {
    fs::read_to_string(path).ok()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path)).map_err(|e| ServiceError::Internal(e.to_string()))
}
