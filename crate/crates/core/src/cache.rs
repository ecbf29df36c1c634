//! On-disk cache of bases and assembled matrices.
//!
//! Basis files are JSON lines: a `# {header}` line, then one oriented class
//! per line. Matrix files are triplet text after a `# {header}` line. Both are
//! named by the SHA-256 of their header and written through a temporary file
//! and a rename. A header that does not match on load is treated as a miss.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ComplexError;
use crate::linalg::SparseIntMatrix;

pub const FORMAT_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "RGC_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".cache";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header<K> {
    pub format_version: u32,
    /// `"ribbon"` or `"gc2"`.
    pub flavor: String,
    pub kind: String,
    pub key: K,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BasisFooter<M> {
    count: usize,
    meta: M,
}

#[derive(Debug, Clone, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

fn hash_name(header: &str) -> String {
    hex::encode(Sha256::digest(header.as_bytes()))
}

fn write_atomic(path: &Path, body: &str) -> Result<(), ComplexError> {
    let dir = path.parent().expect("cache paths have a parent");
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| ComplexError::Io(e.error))?;
    Ok(())
}

impl Cache {
    pub fn disabled() -> Cache {
        Cache { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Cache {
        Cache { dir: Some(dir.into()) }
    }

    /// `$RGC_CACHE_DIR`, else `.cache` in the working directory.
    pub fn from_env() -> Cache {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        Cache::at(dir)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn header_line<K: Serialize>(flavor: &str, kind: &str, key: &K) -> String {
        let h = Header {
            format_version: FORMAT_VERSION,
            flavor: flavor.to_string(),
            kind: kind.to_string(),
            key,
        };
        serde_json::to_string(&h).expect("cache keys serialize")
    }

    fn path(&self, sub: &str, header: &str, ext: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(sub).join(format!("{}.{ext}", hash_name(header))))
    }

    /// Loads a list of records stored under `key`, or computes and stores it.
    /// `meta` travels with the list (counts, notes).
    pub fn records<K, T, M>(
        &self,
        flavor: &str,
        kind: &str,
        key: &K,
        compute: impl FnOnce() -> Result<(Vec<T>, M), ComplexError>,
    ) -> Result<(Vec<T>, M), ComplexError>
    where
        K: Serialize,
        T: Serialize + DeserializeOwned,
        M: Serialize + DeserializeOwned,
    {
        let header = Self::header_line(flavor, kind, key);
        let Some(path) = self.path("basis", &header, "jsonl") else {
            return compute();
        };
        if let Some(hit) = read_records(&path, &header) {
            return Ok(hit);
        }
        let (items, meta) = compute()?;
        write_atomic(&path, &encode_records_with(&header, &items, &meta)?)?;
        Ok((items, meta))
    }

    /// Loads a matrix and its metadata stored under `key`, or computes and
    /// stores them. The metadata sits on the second `#` line.
    pub fn matrix<K: Serialize, M: Serialize + DeserializeOwned>(
        &self,
        flavor: &str,
        kind: &str,
        key: &K,
        compute: impl FnOnce() -> Result<(SparseIntMatrix, M), ComplexError>,
    ) -> Result<(SparseIntMatrix, M), ComplexError> {
        let header = Self::header_line(flavor, kind, key);
        let Some(path) = self.path("matrix", &header, "txt") else {
            return compute();
        };
        if let Some(hit) = read_matrix(&path, &header) {
            return Ok(hit);
        }
        let (m, meta) = compute()?;
        write_atomic(&path, &encode_matrix_with(&header, &m, &meta)?)?;
        Ok((m, meta))
    }
}

fn json<T: Serialize>(x: &T) -> Result<String, ComplexError> {
    serde_json::to_string(x).map_err(|e| ComplexError::Format(e.to_string()))
}

fn encode_records_with<T: Serialize, M: Serialize>(header: &str, items: &[T], meta: &M) -> Result<String, ComplexError> {
    let mut body = format!("# {header}\n");
    for it in items {
        body.push_str(&json(it)?);
        body.push('\n');
    }
    let footer = BasisFooter { count: items.len(), meta };
    body.push_str(&format!("# {}\n", json(&footer)?));
    Ok(body)
}

fn encode_matrix_with<M: Serialize>(header: &str, m: &SparseIntMatrix, meta: &M) -> Result<String, ComplexError> {
    Ok(format!("# {header}\n# {}\n{}", json(meta)?, m.to_triplet_string()))
}

/// The basis file format, for export.
pub fn encode_records<K: Serialize, T: Serialize, M: Serialize>(
    flavor: &str,
    kind: &str,
    key: &K,
    items: &[T],
    meta: &M,
) -> Result<String, ComplexError> {
    encode_records_with(&Cache::header_line(flavor, kind, key), items, meta)
}

/// The matrix file format, for export.
pub fn encode_matrix<K: Serialize, M: Serialize>(
    flavor: &str,
    kind: &str,
    key: &K,
    m: &SparseIntMatrix,
    meta: &M,
) -> Result<String, ComplexError> {
    encode_matrix_with(&Cache::header_line(flavor, kind, key), m, meta)
}

/// Reads a matrix file back, skipping the comment lines.
pub fn decode_matrix(text: &str) -> Result<SparseIntMatrix, ComplexError> {
    Ok(SparseIntMatrix::from_triplet_str(text)?)
}

fn read_matrix<M: DeserializeOwned>(path: &Path, header: &str) -> Option<(SparseIntMatrix, M)> {
    let text = fs::read_to_string(path).ok()?;
    let rest = text.strip_prefix("# ")?.strip_prefix(header)?.strip_prefix('\n')?;
    let (meta_line, body) = rest.split_once('\n')?;
    let meta = serde_json::from_str(meta_line.strip_prefix("# ")?).ok()?;
    let m = SparseIntMatrix::from_triplet_str(body).ok()?;
    Some((m, meta))
}

fn read_records<T: DeserializeOwned, M: DeserializeOwned>(path: &Path, header: &str) -> Option<(Vec<T>, M)> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()?.strip_prefix("# ")? != header {
        return None;
    }
    let mut items = Vec::new();
    for line in lines {
        if let Some(f) = line.strip_prefix("# ") {
            let footer: BasisFooter<M> = serde_json::from_str(f).ok()?;
            return (footer.count == items.len()).then_some((items, footer.meta));
        }
        items.push(serde_json::from_str(line).ok()?);
    }
    // no footer: an interrupted write
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip_and_miss_on_other_key() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::at(dir.path());
        let mut calls = 0;
        let mut get = |k: u32| {
            c.records("ribbon", "test", &k, || {
                calls += 1;
                Ok((vec![k, k + 1], format!("meta{k}")))
            })
            .unwrap()
        };
        assert_eq!(get(1), (vec![1, 2], "meta1".to_string()));
        assert_eq!(get(1), (vec![1, 2], "meta1".to_string()));
        assert_eq!(get(2), (vec![2, 3], "meta2".to_string()));
        assert_eq!(calls, 2);
    }

    #[test]
    fn corrupt_or_truncated_files_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::at(dir.path());
        let key = 7u32;
        let compute = || Ok((vec![1u32, 2, 3], ()));
        c.records("ribbon", "t", &key, compute).unwrap();
        let file = fs::read_dir(dir.path().join("basis")).unwrap().next().unwrap().unwrap().path();
        let text = fs::read_to_string(&file).unwrap();
        let cut: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        fs::write(&file, cut).unwrap();
        let mut recomputed = false;
        let (v, ()) = c
            .records("ribbon", "t", &key, || {
                recomputed = true;
                Ok((vec![1u32, 2, 3], ()))
            })
            .unwrap();
        assert!(recomputed);
        assert_eq!(v, vec![1, 2, 3]);
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::at(dir.path());
        let m = SparseIntMatrix::from_dense(&[vec![1, 0, -2], vec![0, 5, 0]]);
        let a = c.matrix("ribbon", "d", &("x", 1), || Ok((m.clone(), 4u32))).unwrap();
        let b: (SparseIntMatrix, u32) = c.matrix("ribbon", "d", &("x", 1), || panic!("should hit")).unwrap();
        assert_eq!(a, (m.clone(), 4));
        assert_eq!(b, (m, 4));
        let off = Cache::disabled();
        assert!(off.dir().is_none());
    }
}
