use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use cog_core::batch::{generate_range, map_slice, Execution};
use cog_core::catalog::Catalog;
use cog_core::generate::{verify_episode, EpisodeGenerator, GenerationConfig};
use cog_core::render::rasterize_frame;

const EPISODES: u64 = 256;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut out = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        out.push(("parallel", Execution::Parallel));
    }
    out
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group.throughput(Throughput::Elements(EPISODES));
    for (preset, config) in [
        ("canonical", GenerationConfig::canonical(1)),
        ("hard", GenerationConfig::hard(1)),
    ] {
        let g = EpisodeGenerator::new(Catalog::builtin(), config).unwrap();
        for task in ["GetColor", "ExistShape", "AndCompareColor"] {
            for (mode, exec) in modes() {
                group.bench_with_input(BenchmarkId::new(format!("{preset}/{task}"), mode), &exec, |b, &exec| {
                    b.iter(|| generate_range(&g, task, 0..EPISODES, exec).unwrap())
                });
            }
        }
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::hard(2)).unwrap();
    let episodes = generate_range(&g, "AndExistGo", 0..EPISODES, Execution::default()).unwrap();
    let mut group = c.benchmark_group("verify");
    group.throughput(Throughput::Elements(EPISODES));
    for (mode, exec) in modes() {
        group.bench_function(mode, |b| {
            b.iter(|| map_slice(exec, &episodes, |e| verify_episode(black_box(e)).is_ok()))
        });
    }
    group.finish();
}

fn render(c: &mut Criterion) {
    let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::hard(3)).unwrap();
    let frames: Vec<_> = generate_range(&g, "ExistColorGo", 0..32, Execution::default())
        .unwrap()
        .into_iter()
        .flat_map(|e| e.frames)
        .collect();
    let mut group = c.benchmark_group("render");
    group.throughput(Throughput::Elements(frames.len() as u64));
    for (mode, exec) in modes() {
        group.bench_function(mode, |b| {
            b.iter(|| map_slice(exec, &frames, |f| rasterize_frame(f, 112)))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().measurement_time(Duration::from_secs(3)).sample_size(20);
    targets = generation, verification, render
}
criterion_main!(benches);
