use serde::{Deserialize, Serialize};

use crate::generate::GenerationConfig;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Records only.
    Symbolic,
    /// Records plus one PNG per frame.
    Rendered,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(Mode::Symbolic),
            "rendered" => Ok(Mode::Rendered),
            _ => Err(format!("unknown format `{s}` (expected symbolic or rendered)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardInfo {
    pub task: String,
    /// Relative to the dataset directory.
    pub path: String,
    pub records: u64,
    /// Hex sha256 of the shard file.
    pub sha256: String,
    /// Hex sha256 over the shard's PNG files concatenated in record and
    /// frame order; rendered datasets only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images_sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub catalog_version: String,
    pub config: GenerationConfig,
    pub mode: Mode,
    pub tasks: Vec<String>,
    pub episodes_per_task: u64,
    /// First episode index of every task.
    pub start_index: u64,
    pub seed: u64,
    /// Seconds since the Unix epoch. Not covered by any checksum.
    pub created_unix: u64,
    pub shards: Vec<ShardInfo>,
}

impl DatasetManifest {
    pub fn total_records(&self) -> u64 {
        self.shards.iter().map(|s| s.records).sum()
    }

    /// The manifest with the creation time zeroed, for comparing datasets.
    pub fn without_timestamp(&self) -> DatasetManifest {
        DatasetManifest {
            created_unix: 0,
            ..self.clone()
        }
    }
}

pub fn shard_path(task: &str) -> String {
    format!("shards/{task}.jsonl")
}

pub fn image_path(task: &str, index: u64, frame: usize) -> String {
    format!("images/{task}/{index}-{frame}.png")
}
