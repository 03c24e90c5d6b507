//! Content-addressed result cache. Keys hash (operation, canonical inputs,
//! artifact version); entries are written to a temp file and renamed into place.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const ARTIFACT_VERSION: &str = concat!("psdef-", env!("CARGO_PKG_VERSION"));

/// Sorted-key compact JSON. serde_json maps are ordered, so round-tripping
/// through `Value` sorts every object.
pub fn canonical<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("value serialises");
    serde_json::to_string(&v).expect("value prints")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn cache_key(op: &str, inputs: &Value) -> String {
    let mut h = Sha256::new();
    h.update(op.as_bytes());
    h.update([0]);
    h.update(canonical(inputs).as_bytes());
    h.update([0]);
    h.update(ARTIFACT_VERSION.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    digest: String,
    value: Value,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lookup {
    Hit,
    Miss,
    Disabled,
}

pub struct Cache {
    dir: Option<PathBuf>,
    hits: AtomicU64,
    misses: AtomicU64,
    evictions: AtomicU64,
    in_flight: Mutex<HashSet<String>>,
    done: Condvar,
}

impl Cache {
    pub fn new(dir: Option<&Path>) -> Result<Cache> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Cache {
            dir: dir.map(Path::to_path_buf),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            evictions: AtomicU64::new(0),
            in_flight: Mutex::new(HashSet::new()),
            done: Condvar::new(),
        })
    }

    pub fn disabled() -> Cache {
        Cache::new(None).expect("no directory to create")
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            evictions: self.evictions.load(Ordering::Relaxed),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    /// Reads an entry; anything unreadable or inconsistent is deleted.
    pub fn get(&self, key: &str) -> Option<Value> {
        let path = self.path(key)?;
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.key == key && e.digest == sha256_hex(canonical(&e.value).as_bytes()) => Some(e.value),
            _ => {
                let _ = std::fs::remove_file(&path);
                self.evictions.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    pub fn put(&self, key: &str, value: &Value) -> Result<()> {
        let (Some(dir), Some(path)) = (self.dir.as_ref(), self.path(key)) else {
            return Ok(());
        };
        let entry = Entry { key: key.to_string(), digest: sha256_hex(canonical(value).as_bytes()), value: value.clone() };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(canonical(&entry).as_bytes())?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    /// Looks up `key`, computing and storing on a miss. Concurrent callers
    /// with the same key wait for the first one instead of recomputing.
    pub fn get_or_compute<F>(&self, key: &str, compute: F) -> Result<(Value, Lookup)>
    where
        F: FnOnce() -> Result<Value>,
    {
        if !self.enabled() {
            return Ok((compute()?, Lookup::Disabled));
        }
        {
            let mut flying = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
            while flying.contains(key) {
                flying = self.done.wait(flying).unwrap_or_else(|e| e.into_inner());
            }
            if let Some(v) = self.get(key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok((v, Lookup::Hit));
            }
            flying.insert(key.to_string());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let out = compute();
        if let Ok(v) = &out {
            let _ = self.put(key, v);
        }
        self.in_flight.lock().unwrap_or_else(|e| e.into_inner()).remove(key);
        self.done.notify_all();
        out.map(|v| (v, Lookup::Miss))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_sorts_keys() {
        let v = json!({"b": 1, "a": {"d": 2, "c": 3}});
        assert_eq!(canonical(&v), r#"{"a":{"c":3,"d":2},"b":1}"#);
    }

    #[test]
    fn hit_after_miss_and_corruption_evicts() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path())).unwrap();
        let key = cache_key("op", &json!({"x": 1}));
        let (v, l) = cache.get_or_compute(&key, || Ok(json!([1, 2]))).unwrap();
        assert_eq!((v.clone(), l), (json!([1, 2]), Lookup::Miss));
        let (w, l) = cache.get_or_compute(&key, || panic!("should hit")).unwrap();
        assert_eq!((w, l), (v, Lookup::Hit));
        std::fs::write(dir.path().join(format!("{key}.json")), "{\"key\":\"garbage").unwrap();
        let (_, l) = cache.get_or_compute(&key, || Ok(json!([1, 2]))).unwrap();
        assert_eq!(l, Lookup::Miss);
        assert_eq!(cache.stats(), CacheStats { hits: 1, misses: 2, evictions: 1 });
    }

    #[test]
    fn tampered_value_is_not_trusted() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path())).unwrap();
        let key = cache_key("op", &json!(null));
        cache.put(&key, &json!(7)).unwrap();
        let path = dir.path().join(format!("{key}.json"));
        let text = std::fs::read_to_string(&path).unwrap().replace(":7", ":8");
        std::fs::write(&path, text).unwrap();
        assert_eq!(cache.get(&key), None);
        assert!(!path.exists());
    }
}
