use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cog_core::batch::{generate_range, Execution};
use cog_core::catalog::Catalog;
use cog_core::count::{instance_count, order_of_magnitude, total_count};
use cog_core::eval::{audit_bias, catalog_chance, chance_level};
use cog_core::generate::{verify_episode, EpisodeGenerator, GenerationConfig};
use cog_core::io::{default_data_dir, write_dataset, DatasetReader, Mode};
use cog_core::render::{contact_sheet, rasterize_frame};

#[derive(Parser)]
#[command(
    name = "cog",
    version,
    about = "Compositional temporal visual-reasoning task generator"
)]
struct Cli {
    /// Run single-threaded even when built with the parallel feature.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct ConfigArgs {
    /// Starting preset: canonical (F=4, M=3, D=1) or hard (F=8, M=7, D=10).
    #[arg(long, default_value = "canonical")]
    preset: String,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    max_memory: Option<usize>,
    #[arg(long)]
    max_distractors: Option<usize>,
    /// Image side in pixels.
    #[arg(long)]
    canvas: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ConfigArgs {
    fn build(&self) -> Result<GenerationConfig, Failure> {
        let mut c = GenerationConfig::preset(&self.preset, self.seed)
            .ok_or_else(|| Failure::usage(format!("unknown preset `{}`", self.preset)))?;
        c.frames = self.frames.unwrap_or(c.frames);
        c.max_memory = self.max_memory.unwrap_or(c.max_memory);
        c.max_distractors = self.max_distractors.unwrap_or(c.max_distractors);
        c.canvas = self.canvas.unwrap_or(c.canvas);
        c.validate().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset directory.
    Generate {
        /// Comma-separated task names, or `all`.
        #[arg(long, default_value = "all", value_delimiter = ',')]
        tasks: Vec<String>,
        #[arg(long, default_value_t = 100)]
        episodes_per_task: u64,
        #[arg(long, default_value_t = 0)]
        start_index: u64,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory [default: $COG_DATA_DIR or ./cog-data].
        #[arg(long)]
        out: Option<PathBuf>,
        /// symbolic or rendered.
        #[arg(long, default_value = "symbolic")]
        format: Mode,
    },
    /// Check a dataset's checksums and re-run every episode through the
    /// interpreter.
    Verify {
        /// Dataset directory [default: $COG_DATA_DIR or ./cog-data].
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Also regenerate every episode from the manifest and compare.
        #[arg(long)]
        regenerate: bool,
    },
    /// Report the target distribution of one task.
    Audit {
        #[arg(long)]
        task: String,
        #[arg(long, default_value_t = 20_000)]
        n: u64,
        #[command(flatten)]
        config: ConfigArgs,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write a contact sheet PNG of a few episodes.
    Preview {
        #[arg(long)]
        task: String,
        #[arg(long, default_value_t = 4)]
        episodes: u64,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "preview.png")]
        out: PathBuf,
    },
    /// Count distinct task instances in the catalog.
    Count {
        /// Anchors of free spatial ranges are counted on a GRID x GRID lattice.
        #[arg(long, default_value_t = 32)]
        grid: u32,
        /// Print one line per task as well.
        #[arg(long)]
        per_task: bool,
    },
    /// List catalog tasks with their output spaces and chance levels.
    Tasks,
    /// Serve episodes over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Seed used when a request carries no config.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Exit status with a message for standard error.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure {
            code: 1,
            msg: msg.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn generator(config: GenerationConfig) -> Result<EpisodeGenerator<'static>, Failure> {
    EpisodeGenerator::new(Catalog::builtin(), config).map_err(|e| Failure::usage(e.to_string()))
}

fn resolve_tasks(names: &[String]) -> Result<Vec<String>, Failure> {
    Catalog::builtin()
        .resolve(names)
        .map(|ts| ts.iter().map(|t| t.name.clone()).collect())
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(command: Command, exec: Execution) -> Result<(), Failure> {
    match command {
        Command::Generate {
            tasks,
            episodes_per_task,
            start_index,
            config,
            out,
            format,
        } => {
            let g = generator(config.build()?)?;
            let tasks = resolve_tasks(&tasks)?;
            let out = out.unwrap_or_else(default_data_dir);
            let manifest = write_dataset(&g, &tasks, episodes_per_task, start_index, &out, format, exec)
                .map_err(|e| Failure::invalid(e.to_string()))?;
            println!(
                "wrote {} records in {} shards to {}",
                manifest.total_records(),
                manifest.shards.len(),
                out.display()
            );
            Ok(())
        }
        Command::Verify { dir, regenerate } => verify(dir.unwrap_or_else(default_data_dir), regenerate, exec),
        Command::Audit { task, n, config, json } => {
            let g = generator(config.build()?)?;
            let report = audit_bias(&g, &task, n, exec).map_err(|e| match e {
                cog_core::error::AuditError::TooFew { .. } => Failure::usage(e.to_string()),
                cog_core::error::AuditError::Generate(cog_core::error::GenerateError::UnknownTask(_)) => {
                    Failure::usage(e.to_string())
                }
                other => Failure::invalid(other.to_string()),
            })?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
                return Ok(());
            }
            println!(
                "task {} over {} episodes ({} invalid targets)",
                report.task, report.episodes, report.invalid
            );
            if let Some(rate) = report.true_rate {
                println!("true rate {rate:.4}");
            }
            for test in &report.chi_square {
                println!(
                    "chi-square {:?}: n={} statistic={:.2} dof={} p={:.4}",
                    test.space, test.samples, test.statistic, test.dof, test.p_value
                );
            }
            for (class, count) in &report.histogram {
                println!("  {class:>12} {count}");
            }
            let hist: Vec<String> = report
                .memory_histogram
                .iter()
                .map(|(d, c)| format!("{d}:{c}"))
                .collect();
            println!("memory durations {} mean {:?}", hist.join(" "), report.mean_memory);
            println!(
                "distractors tried {} removed {} (rate {:?}); relaxed episodes {}",
                report.distractors_tried, report.distractors_removed, report.deletion_rate, report.relaxed
            );
            Ok(())
        }
        Command::Preview {
            task,
            episodes,
            config,
            out,
        } => {
            let config = config.build()?;
            let g = generator(config)?;
            let eps = generate_range(&g, &task, 0..episodes, exec).map_err(|e| Failure::usage(e.to_string()))?;
            let rows: Vec<_> = eps
                .iter()
                .map(|e| e.frames.iter().map(|f| rasterize_frame(f, config.canvas)).collect())
                .collect();
            let png = contact_sheet(&rows)
                .to_png()
                .map_err(|e| Failure::invalid(e.to_string()))?;
            std::fs::write(&out, png).map_err(|e| Failure::invalid(format!("{}: {e}", out.display())))?;
            for e in &eps {
                let targets: Vec<String> = e.targets.iter().map(|t| t.to_string()).collect();
                println!("{}: {} -> [{}]", e.id(), e.instruction, targets.join(", "));
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Count { grid, per_task } => {
            if grid == 0 {
                return Err(Failure::usage("--grid must be at least 1"));
            }
            let catalog = Catalog::builtin();
            if per_task {
                for t in catalog.tasks() {
                    println!("{:<28} {}", t.name, instance_count(&t.graph, grid));
                }
            }
            let total = total_count(catalog.tasks().iter().map(|t| &*t.graph), grid);
            println!(
                "{} tasks, spatial anchors discretized on a {grid}x{grid} grid: {total} instances (order of magnitude 10^{})",
                catalog.len(),
                order_of_magnitude(&total).unwrap_or(0)
            );
            Ok(())
        }
        Command::Tasks => {
            let catalog = Catalog::builtin();
            for t in catalog.tasks() {
                let space = t.output_space();
                println!(
                    "{:<28} {:<12} chance {:.4}  {:?}",
                    t.name,
                    t.family,
                    chance_level(&space),
                    space
                );
            }
            let (_, mean) = catalog_chance(catalog);
            println!("mean chance level {mean:.4}");
            Ok(())
        }
        Command::Serve { port, host, seed } => {
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Failure::usage(format!("bad address {host}:{port}: {e}")))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::invalid(e.to_string()))?;
            eprintln!("serving on http://{addr}");
            rt.block_on(cog_server::serve(addr, seed))
                .map_err(|e| Failure::invalid(format!("{addr}: {e}")))
        }
    }
}

fn verify(dir: PathBuf, regenerate: bool, exec: Execution) -> Result<(), Failure> {
    let reader = DatasetReader::open(&dir).map_err(|e| Failure::invalid(e.to_string()))?;
    let manifest = reader.manifest().clone();
    let mut checked = 0u64;
    let mut failures = 0u64;
    for episode in reader.episodes() {
        let episode = episode.map_err(|e| Failure::invalid(e.to_string()))?;
        if let Err(m) = verify_episode(&episode) {
            failures += 1;
            eprintln!("{}: {m}", episode.id());
        }
        checked += 1;
    }
    if regenerate {
        let g = generator(manifest.config)?;
        let scratch = std::env::temp_dir().join(format!("cog-verify-{}", std::process::id()));
        let again = write_dataset(
            &g,
            &manifest.tasks,
            manifest.episodes_per_task,
            manifest.start_index,
            &scratch,
            manifest.mode,
            exec,
        );
        let _ = std::fs::remove_dir_all(&scratch);
        let again = again.map_err(|e| Failure::invalid(e.to_string()))?;
        for (a, b) in manifest.shards.iter().zip(&again.shards) {
            if a != b {
                failures += 1;
                eprintln!(
                    "{}: regenerated checksum {} differs from {}",
                    a.path, b.sha256, a.sha256
                );
            }
        }
    }
    if failures > 0 {
        return Err(Failure::invalid(format!(
            "{failures} problems in {checked} episodes under {}",
            dir.display()
        )));
    }
    println!("{checked} episodes verified in {}", dir.display());
    Ok(())
}
