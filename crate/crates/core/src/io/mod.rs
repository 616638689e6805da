//! Dataset persistence.
//!
//! A dataset directory holds `manifest.json`, one line-delimited JSON shard
//! per task under `shards/` and, in rendered mode, one PNG per frame under
//! `images/<task>/`. Shards are checksummed with sha256; the manifest carries
//! everything needed to regenerate them. See `docs/dataset-format.md`.

mod manifest;
mod read;
mod record;
mod write;

use std::path::PathBuf;

use thiserror::Error;

use crate::error::GenerateError;
use crate::render::RenderError;

pub use manifest::{image_path, shard_path, DatasetManifest, Mode, ShardInfo, FORMAT_VERSION, MANIFEST_FILE};
pub use read::{DatasetReader, EpisodeIter};
pub use record::EpisodeRecord;
pub use write::{render_pngs, write_dataset, DatasetPlan, DatasetWriter};

/// Environment variable naming the default dataset directory.
pub const DATA_DIR_ENV: &str = "COG_DATA_DIR";

/// `$COG_DATA_DIR`, or `./cog-data` when unset or empty.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map_or_else(|| PathBuf::from("cog-data"), PathBuf::from)
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checksum mismatch in {shard}: manifest has {expected}, file has {actual}")]
    Checksum {
        shard: String,
        expected: String,
        actual: String,
    },
    #[error("unsupported format version {found} (this build reads {supported})")]
    FormatVersion { found: u32, supported: u32 },
    #[error("dataset uses catalog {found}, this build ships {supported}")]
    CatalogVersion { found: String, supported: String },
    #[error("{path} line {line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("bad record: {0}")]
    Record(String),
    #[error("episode stream does not match the plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DatasetError {
    let path = path.into();
    move |source| DatasetError::Io { path, source }
}
