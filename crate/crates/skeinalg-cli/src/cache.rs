//! Disk cache for Jones-Wenzl projectors.
//!
//! One versioned JSON file per order, written atomically
//! (temp-then-rename). Corrupted or version-mismatched entries are
//! ignored and recomputed, never trusted.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use skeinalg::recoupling::{cached_projector_orders, jones_wenzl, seed_jones_wenzl};
use skeinalg::skein::SkeinElement;

pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    kind: String,
    n: usize,
    element: SkeinElement,
}

pub struct ProjectorCache {
    dir: PathBuf,
}

impl ProjectorCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating cache directory {}", dir.display()))?;
        Ok(ProjectorCache { dir })
    }

    fn path_for(&self, n: usize) -> PathBuf {
        self.dir.join(format!("jw{n:02}.v{CACHE_FORMAT_VERSION}.json"))
    }

    /// Loads one entry; `None` for missing, corrupted, or mismatched
    /// files (those get recomputed and overwritten later).
    pub fn load(&self, n: usize) -> Option<SkeinElement> {
        let path = self.path_for(n);
        let text = fs::read_to_string(path).ok()?;
        let file: CacheFile = serde_json::from_str(&text).ok()?;
        if file.version != CACHE_FORMAT_VERSION || file.kind != "jones-wenzl" || file.n != n {
            return None;
        }
        if file.element.bot() != n || file.element.top() != n {
            return None;
        }
        Some(file.element)
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn store(&self, n: usize, element: &SkeinElement) -> Result<()> {
        let file = CacheFile {
            version: CACHE_FORMAT_VERSION,
            kind: "jones-wenzl".into(),
            n,
            element: element.clone(),
        };
        let text = serde_json::to_string(&file).context("serializing projector")?;
        let final_path = self.path_for(n);
        let tmp_path = self.dir.join(format!(
            ".jw{n:02}.tmp.{}",
            std::process::id()
        ));
        fs::write(&tmp_path, text)
            .with_context(|| format!("writing {}", tmp_path.display()))?;
        fs::rename(&tmp_path, &final_path)
            .with_context(|| format!("renaming into {}", final_path.display()))?;
        Ok(())
    }

    /// Seeds the in-process memo table from disk for orders `1..=max_n`.
    pub fn preload(&self, max_n: usize) -> usize {
        let mut loaded = 0;
        for n in 1..=max_n {
            if let Some(elem) = self.load(n) {
                if seed_jones_wenzl(n, elem).is_ok() {
                    loaded += 1;
                }
            }
        }
        loaded
    }

    /// Returns the projector, preferring disk, computing and persisting
    /// on a miss.
    pub fn get_or_compute(&self, n: usize) -> Result<Arc<SkeinElement>> {
        if let Some(elem) = self.load(n) {
            seed_jones_wenzl(n, elem)?;
        }
        let f = jones_wenzl(n)?;
        if self.load(n).is_none() {
            self.store(n, &f)?;
        }
        Ok(f)
    }

    /// Writes back every memoized order not yet on disk.
    pub fn write_back(&self) -> Result<usize> {
        let mut written = 0;
        for n in cached_projector_orders() {
            if self.load(n).is_none() {
                let f = jones_wenzl(n)?;
                self.store(n, &f)?;
                written += 1;
            }
        }
        Ok(written)
    }
}
