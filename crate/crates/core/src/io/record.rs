//! One episode per line.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::generate::{Episode, GenerationConfig, SeedPath};
use crate::instance::{Binding, TaskInstance};
use crate::response::ResponseValue;
use crate::scene::Frame;

use super::DatasetError;

/// Wire form of an [`Episode`]. The generation config lives in the manifest
/// (or the request that produced the record), not in every line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub id: String,
    pub task: String,
    pub index: u64,
    pub instruction: String,
    pub bindings: Vec<Binding>,
    pub frames: Vec<Frame>,
    pub targets: Vec<ResponseValue>,
    pub seed_path: SeedPath,
    /// Relative PNG paths, one per frame, in rendered datasets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<String>,
    /// Inline base64 PNGs, one per frame, in server responses.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images_base64: Vec<String>,
}

impl EpisodeRecord {
    pub fn from_episode(episode: &Episode) -> Self {
        EpisodeRecord {
            id: episode.id(),
            task: episode.task().to_string(),
            index: episode.seed_path.index,
            instruction: episode.instruction.clone(),
            bindings: episode.instance.bindings.clone(),
            frames: episode.frames.clone(),
            targets: episode.targets.clone(),
            seed_path: episode.seed_path,
            images: Vec::new(),
            images_base64: Vec::new(),
        }
    }

    /// Rebuilds the episode against `catalog`. Recorded targets are kept as
    /// they are, so a tampered record still fails verification.
    pub fn into_episode(self, catalog: &Catalog, config: GenerationConfig) -> Result<Episode, DatasetError> {
        let entry = catalog
            .get(&self.task)
            .ok_or_else(|| DatasetError::Record(format!("{}: unknown task `{}`", self.id, self.task)))?;
        let instance = TaskInstance::new(self.task.clone(), Arc::clone(&entry.graph), self.bindings)
            .ok_or_else(|| DatasetError::Record(format!("{}: bindings do not fit the task graph", self.id)))?;
        Ok(Episode {
            instance,
            instruction: self.instruction,
            frames: self.frames,
            targets: self.targets,
            config,
            seed_path: self.seed_path,
        })
    }

    /// Serialized record followed by a newline.
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("records always serialize");
        line.push('\n');
        line
    }
}
