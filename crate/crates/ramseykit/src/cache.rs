//! File-backed result cache for the command line front end.
//!
//! Entries are keyed by a digest of (tool version, operation, normalized
//! inputs, caps); the stored value is the complete rendered record including
//! the certificate, so replays are verbatim and re-verification works
//! offline. Writes go through a temporary file and an atomic rename, which
//! gives single-writer commits with concurrent readers.

use std::fs;
use std::path::PathBuf;

/// 64-bit FNV-1a, the digest used for cache keys and content hashes.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Cache {
        if let Some(d) = &dir {
            // Caching is disabled silently when the directory is unusable.
            if fs::create_dir_all(d).is_err() {
                return Cache { dir: None };
            }
        }
        Cache { dir }
    }

    pub fn disabled() -> Cache {
        Cache { dir: None }
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    fn path(&self, key: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key:016x}.txt")))
    }

    pub fn get(&self, key: u64) -> Option<String> {
        fs::read_to_string(self.path(key)?).ok()
    }

    pub fn put(&self, key: u64, value: &str) {
        let Some(path) = self.path(key) else { return };
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        if fs::write(&tmp, value).is_ok() {
            let _ = fs::rename(&tmp, &path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_miss() {
        let dir = std::env::temp_dir().join(format!("ramseykit-cache-test-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let cache = Cache::new(Some(dir.clone()));
        assert!(cache.enabled());
        let key = fnv64(b"arrow k6 k3 k2");
        assert_eq!(cache.get(key), None);
        cache.put(key, "verdict: holds\n");
        assert_eq!(cache.get(key).as_deref(), Some("verdict: holds\n"));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn disabled_cache_is_inert() {
        let cache = Cache::disabled();
        assert!(!cache.enabled());
        cache.put(1, "x");
        assert_eq!(cache.get(1), None);
    }
}
