use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::batch::{map_indices, Execution};
use crate::generate::{Episode, EpisodeGenerator, GenerationConfig};
use crate::render::{rasterize_frame, RenderError};

use super::manifest::{image_path, shard_path, DatasetManifest, Mode, ShardInfo, FORMAT_VERSION, MANIFEST_FILE};
use super::read::hash_file;
use super::record::EpisodeRecord;
use super::{io_err, DatasetError};

/// What a dataset will contain: episodes `start..start + per_task` of each
/// task, in task order.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetPlan {
    pub catalog_version: String,
    pub config: GenerationConfig,
    pub mode: Mode,
    pub tasks: Vec<String>,
    pub episodes_per_task: u64,
    pub start_index: u64,
}

/// PNG bytes of every frame of `episode`.
pub fn render_pngs(episode: &Episode) -> Result<Vec<Vec<u8>>, RenderError> {
    episode
        .frames
        .iter()
        .map(|f| rasterize_frame(f, episode.config.canvas).to_png())
        .collect()
}

struct OpenShard {
    info: ShardInfo,
    file: BufWriter<File>,
    hasher: Sha256,
    images: Option<Sha256>,
}

/// Writes a planned episode stream. Episodes must arrive in plan order;
/// anything else is a [`DatasetError::Plan`].
pub struct DatasetWriter {
    root: PathBuf,
    plan: DatasetPlan,
    shards: Vec<ShardInfo>,
    current: Option<OpenShard>,
    /// Position in the plan: task number and episode offset.
    next: (usize, u64),
}

impl DatasetWriter {
    pub fn create(root: impl Into<PathBuf>, plan: DatasetPlan) -> Result<Self, DatasetError> {
        let root = root.into();
        fs::create_dir_all(root.join("shards")).map_err(io_err(&root))?;
        Ok(DatasetWriter {
            root,
            plan,
            shards: Vec::new(),
            current: None,
            next: (0, 0),
        })
    }

    pub fn plan(&self) -> &DatasetPlan {
        &self.plan
    }

    fn expect(&mut self, task: &str, index: u64) -> Result<(), DatasetError> {
        if self.plan.episodes_per_task == 0 {
            return Err(DatasetError::Plan("the plan has no episodes".into()));
        }
        let (t, offset) = self.next;
        let want_task = self
            .plan
            .tasks
            .get(t)
            .ok_or_else(|| DatasetError::Plan(format!("{task}/{index} arrived after the last planned episode")))?;
        let want_index = self.plan.start_index + offset;
        if task != want_task || index != want_index {
            return Err(DatasetError::Plan(format!(
                "expected {want_task}/{want_index}, got {task}/{index}"
            )));
        }
        if offset == 0 {
            self.open_shard(task)?;
        }
        self.next = if offset + 1 == self.plan.episodes_per_task {
            (t + 1, 0)
        } else {
            (t, offset + 1)
        };
        Ok(())
    }

    fn open_shard(&mut self, task: &str) -> Result<(), DatasetError> {
        self.close_shard()?;
        let rel = shard_path(task);
        let path = self.root.join(&rel);
        let file = File::create(&path).map_err(io_err(&path))?;
        if self.plan.mode == Mode::Rendered {
            let dir = self.root.join("images").join(task);
            fs::create_dir_all(&dir).map_err(io_err(dir))?;
        }
        self.current = Some(OpenShard {
            info: ShardInfo {
                task: task.to_string(),
                path: rel,
                records: 0,
                sha256: String::new(),
                images_sha256: None,
            },
            file: BufWriter::new(file),
            hasher: Sha256::new(),
            images: (self.plan.mode == Mode::Rendered).then(Sha256::new),
        });
        Ok(())
    }

    fn close_shard(&mut self) -> Result<(), DatasetError> {
        if let Some(mut shard) = self.current.take() {
            let path = self.root.join(&shard.info.path);
            shard.file.flush().map_err(io_err(&path))?;
            shard.info.sha256 = hex(shard.hasher.finalize().as_slice());
            shard.info.images_sha256 = shard.images.map(|h| hex(h.finalize().as_slice()));
            self.shards.push(shard.info);
        }
        Ok(())
    }

    pub fn write(&mut self, episode: &Episode) -> Result<(), DatasetError> {
        let pngs = match self.plan.mode {
            Mode::Rendered => render_pngs(episode)?,
            Mode::Symbolic => Vec::new(),
        };
        self.write_prepared(EpisodeRecord::from_episode(episode), pngs)
    }

    /// Writes a record whose PNGs (rendered mode) were produced elsewhere,
    /// typically on another thread.
    pub fn write_prepared(&mut self, mut record: EpisodeRecord, pngs: Vec<Vec<u8>>) -> Result<(), DatasetError> {
        self.expect(&record.task, record.index)?;
        let shard = self.current.as_mut().expect("expect() opened a shard");
        if self.plan.mode == Mode::Rendered {
            if pngs.len() != record.frames.len() {
                return Err(DatasetError::Record(format!(
                    "{}: {} images for {} frames",
                    record.id,
                    pngs.len(),
                    record.frames.len()
                )));
            }
            let images = shard.images.as_mut().expect("rendered shards hash images");
            for (frame, png) in pngs.iter().enumerate() {
                let rel = image_path(&record.task, record.index, frame);
                let path = self.root.join(&rel);
                fs::write(&path, png).map_err(io_err(&path))?;
                images.update(png);
                record.images.push(rel);
            }
        }
        let line = record.to_line();
        let path = &shard.info.path;
        shard
            .file
            .write_all(line.as_bytes())
            .map_err(io_err(self.root.join(path)))?;
        shard.hasher.update(line.as_bytes());
        shard.info.records += 1;
        Ok(())
    }

    /// Closes the last shard, re-reads every shard to check its checksum and
    /// writes the manifest.
    pub fn finish(mut self) -> Result<DatasetManifest, DatasetError> {
        self.close_shard()?;
        let planned = if self.plan.episodes_per_task == 0 {
            0
        } else {
            self.plan.tasks.len()
        };
        if self.shards.len() != planned || self.next != (planned, 0) {
            return Err(DatasetError::Plan(format!(
                "stream ended early: {} of {planned} shards complete",
                self.shards.len().min(self.next.0)
            )));
        }
        for shard in &self.shards {
            let actual = hash_file(&self.root.join(&shard.path))?;
            if actual != shard.sha256 {
                return Err(DatasetError::Checksum {
                    shard: shard.path.clone(),
                    expected: shard.sha256.clone(),
                    actual,
                });
            }
        }
        let manifest = DatasetManifest {
            format_version: FORMAT_VERSION,
            catalog_version: self.plan.catalog_version.clone(),
            config: self.plan.config,
            mode: self.plan.mode,
            tasks: self.plan.tasks.clone(),
            episodes_per_task: self.plan.episodes_per_task,
            start_index: self.plan.start_index,
            seed: self.plan.config.seed,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            shards: self.shards,
        };
        let path = self.root.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(path))?;
        Ok(manifest)
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Generates and writes a whole dataset. Episodes (and their PNGs) are
/// produced in parallel chunks and written in plan order.
pub fn write_dataset(
    generator: &EpisodeGenerator<'_>,
    tasks: &[String],
    episodes_per_task: u64,
    start_index: u64,
    out: &Path,
    mode: Mode,
    exec: Execution,
) -> Result<DatasetManifest, DatasetError> {
    const CHUNK: u64 = 2048;
    let plan = DatasetPlan {
        catalog_version: generator.catalog().version().to_string(),
        config: *generator.config(),
        mode,
        tasks: tasks.to_vec(),
        episodes_per_task,
        start_index,
    };
    let mut writer = DatasetWriter::create(out, plan)?;
    for task in tasks {
        let end = start_index + episodes_per_task;
        let mut lo = start_index;
        while lo < end {
            let hi = (lo + CHUNK).min(end);
            let prepared = map_indices(exec, lo..hi, |i| -> Result<_, DatasetError> {
                let episode = generator.generate(task, i)?;
                let pngs = match mode {
                    Mode::Rendered => render_pngs(&episode)?,
                    Mode::Symbolic => Vec::new(),
                };
                Ok((EpisodeRecord::from_episode(&episode), pngs))
            });
            for item in prepared {
                let (record, pngs) = item?;
                writer.write_prepared(record, pngs)?;
            }
            lo = hi;
        }
    }
    writer.finish()
}
