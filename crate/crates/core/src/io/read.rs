use std::fs::{self, File};
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::catalog::Catalog;
use crate::generate::Episode;

use super::manifest::{DatasetManifest, ShardInfo, FORMAT_VERSION, MANIFEST_FILE};
use super::record::EpisodeRecord;
use super::write::hex;
use super::{io_err, DatasetError};

/// Streaming sha256 of a file.
pub(crate) fn hash_file(path: &Path) -> Result<String, DatasetError> {
    let mut file = File::open(path).map_err(io_err(path))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(hasher.finalize().as_slice()))
}

/// An opened, checksum-validated dataset.
#[derive(Debug)]
pub struct DatasetReader<'c> {
    root: PathBuf,
    manifest: DatasetManifest,
    catalog: &'c Catalog,
}

impl DatasetReader<'static> {
    /// Opens a dataset written against the built-in catalog.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, DatasetError> {
        Self::open_with_catalog(root, Catalog::builtin())
    }
}

impl<'c> DatasetReader<'c> {
    /// Reads the manifest and validates every shard checksum (and image
    /// checksum in rendered datasets) before any episode is yielded.
    pub fn open_with_catalog(root: impl Into<PathBuf>, catalog: &'c Catalog) -> Result<Self, DatasetError> {
        let root = root.into();
        let manifest = read_manifest(&root)?;
        if manifest.catalog_version != catalog.version() {
            return Err(DatasetError::CatalogVersion {
                found: manifest.catalog_version,
                supported: catalog.version().to_string(),
            });
        }
        let reader = DatasetReader {
            root,
            manifest,
            catalog,
        };
        for shard in &reader.manifest.shards {
            reader.check_shard(shard)?;
        }
        Ok(reader)
    }

    fn check_shard(&self, shard: &ShardInfo) -> Result<(), DatasetError> {
        let actual = hash_file(&self.root.join(&shard.path))?;
        if actual != shard.sha256 {
            return Err(DatasetError::Checksum {
                shard: shard.path.clone(),
                expected: shard.sha256.clone(),
                actual,
            });
        }
        if let Some(expected) = &shard.images_sha256 {
            let mut hasher = Sha256::new();
            for record in self.records_of(shard) {
                for rel in &record?.images {
                    let path = self.root.join(rel);
                    hasher.update(fs::read(&path).map_err(io_err(path))?);
                }
            }
            let actual = hex(hasher.finalize().as_slice());
            if &actual != expected {
                return Err(DatasetError::Checksum {
                    shard: format!("{} (images)", shard.path),
                    expected: expected.clone(),
                    actual,
                });
            }
        }
        Ok(())
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Raw records of one shard, read line by line.
    pub fn records_of(&self, shard: &ShardInfo) -> impl Iterator<Item = Result<EpisodeRecord, DatasetError>> {
        let path = self.root.join(&shard.path);
        let name = shard.path.clone();
        let lines = File::open(&path)
            .map(|f| BufReader::new(f).lines())
            .map_err(io_err(&path));
        let (lines, open_err) = match lines {
            Ok(l) => (Some(l), None),
            Err(e) => (None, Some(e)),
        };
        open_err
            .map(Err)
            .into_iter()
            .chain(lines.into_iter().flatten().enumerate().map(move |(i, line)| {
                let line = line.map_err(io_err(&path))?;
                serde_json::from_str(&line).map_err(|source| DatasetError::Json {
                    path: name.clone(),
                    line: i + 1,
                    source,
                })
            }))
    }

    /// All records in manifest order.
    pub fn records(&self) -> impl Iterator<Item = Result<EpisodeRecord, DatasetError>> + '_ {
        self.manifest.shards.iter().flat_map(|s| self.records_of(s))
    }

    /// All episodes in manifest order, one record in memory at a time.
    pub fn episodes(&self) -> EpisodeIter<'_> {
        EpisodeIter {
            inner: Box::new(
                self.records()
                    .map(|r| r.and_then(|rec| rec.into_episode(self.catalog, self.manifest.config))),
            ),
        }
    }

    /// Bytes of a file referenced by a record.
    pub fn read_file(&self, rel: &str) -> Result<Vec<u8>, DatasetError> {
        let path = self.root.join(rel);
        fs::read(&path).map_err(io_err(path))
    }
}

/// Lazy episode stream of a [`DatasetReader`].
pub struct EpisodeIter<'r> {
    inner: Box<dyn Iterator<Item = Result<Episode, DatasetError>> + 'r>,
}

impl Iterator for EpisodeIter<'_> {
    type Item = Result<Episode, DatasetError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.inner.next()
    }
}

pub(crate) fn read_manifest(root: &Path) -> Result<DatasetManifest, DatasetError> {
    let path = root.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    // Check the version before the full schema so newer manifests get a
    // version error rather than a parse error.
    let version = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v.get("format_version")?.as_u64());
    if let Some(v) = version {
        if v != u64::from(FORMAT_VERSION) {
            return Err(DatasetError::FormatVersion {
                found: v as u32,
                supported: FORMAT_VERSION,
            });
        }
    }
    serde_json::from_str(&text).map_err(|source| DatasetError::Json {
        path: MANIFEST_FILE.to_string(),
        line: source.line(),
        source,
    })
}
