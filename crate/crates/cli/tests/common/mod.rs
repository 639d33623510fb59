#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};
use semadev_core::embedding::{write_jsonl, EmbeddingSeries};
use semadev_core::rng::rng_from_seed;
use semadev_core::signal::IncrementSeries;
use semadev_core::synth::{simulate, SignalKind};

use semadev::signal_file::{Generator, SignalFile};

/// Independent isotropic Gaussian directions; their angles are i.i.d.
pub fn random_directions(n: usize, dim: usize, seed: u64) -> EmbeddingSeries {
    let mut rng = rng_from_seed(seed);
    let data: Vec<f32> = (0..n * dim)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            x as f32
        })
        .collect();
    EmbeddingSeries::from_flat(data, dim, format!("directions:{seed}")).unwrap()
}

pub fn write_directions(dir: &Path, name: &str, n: usize, dim: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    write_jsonl(&random_directions(n, dim, seed), &path).unwrap();
    path
}

pub fn signal(kind: SignalKind, n: usize, seed: u64) -> IncrementSeries {
    simulate(&kind, n, seed).unwrap()
}

pub fn write_signal(dir: &Path, name: &str, kind: SignalKind, n: usize, seed: u64) -> PathBuf {
    let inc = signal(kind, n, seed);
    let path = dir.join(name);
    std::fs::write(
        &path,
        SignalFile::new(&inc, Some(Generator { kind, n, seed })).to_json(),
    )
    .unwrap();
    path
}

/// A short prose document with `n` sentences.
pub fn prose(n: usize) -> String {
    (0..n)
        .map(|i| format!("Sentence {i} talks about topic {}. ", i % 7))
        .collect()
}
