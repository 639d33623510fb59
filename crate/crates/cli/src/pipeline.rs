//! Single-document pipeline: load → segment → embed → increments → phase →
//! Allan curve → exponent fit → horizon, plus the shuffle null test.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use semadev_core::allan::{self, AllanCurve};
use semadev_core::corpus::{self, SentenceSequence};
use semadev_core::embedding::remote::{fetch_remote, RemoteConfig};
use semadev_core::embedding::{self, EmbeddingSeries};
use semadev_core::rng::{fnv1a64, mix_seed};
use semadev_core::scaling::{self, SlopeFit};
use semadev_core::signal::{self, IncrementSeries};

use crate::config::{AnalysisConfig, InputKind};
use crate::report::{AnalysisReport, ShuffleSection, SCHEMA, TOOL_VERSION};
use crate::signal_file::SignalFile;

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Segment,
    Embed,
    Signal,
    Allan,
    Fit,
    Horizon,
    Shuffle,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Load => "load",
            Stage::Segment => "segment",
            Stage::Embed => "embed",
            Stage::Signal => "signal",
            Stage::Allan => "allan",
            Stage::Fit => "fit",
            Stage::Horizon => "horizon",
            Stage::Shuffle => "shuffle",
            Stage::Write => "write",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage}: {error}")]
    Stage { stage: Stage, error: BoxError },
    #[error("no inputs found under {0}")]
    NoInputs(String),
}

impl PipelineError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The wrapped upstream error, if it is a `T`.
    pub fn cause<T: std::error::Error + 'static>(&self) -> Option<&T> {
        match self {
            PipelineError::Stage { error, .. } => error.downcast_ref::<T>(),
            _ => None,
        }
    }
}

pub(crate) fn at<E: Into<BoxError>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        error: e.into(),
    }
}

/// A document reduced to its increment series.
#[derive(Debug, Clone)]
pub struct Document {
    pub source_id: String,
    pub genre: Option<String>,
    pub n_sentences: usize,
    pub increments: IncrementSeries,
    /// Kept so shuffles permute sentences rather than increments.
    pub embeddings: Option<EmbeddingSeries>,
}

fn read_embeddings(path: &Path) -> Result<EmbeddingSeries, PipelineError> {
    let series = match InputKind::from_path(path) {
        Some(InputKind::Binary) => embedding::read_binary(path),
        _ => embedding::read_jsonl(path),
    };
    series.map_err(at(Stage::Embed))
}

fn embed_sentences(
    cfg: &AnalysisConfig,
    sentences: &SentenceSequence,
    sidecar: Option<&Path>,
) -> Result<EmbeddingSeries, PipelineError> {
    if let Some(path) = sidecar.or(cfg.embeddings.as_deref()) {
        let mut series = read_embeddings(path)?;
        if series.len() != sentences.len() {
            return Err(at(Stage::Embed)(format!(
                "{} has {} vectors but the text has {} sentences",
                path.display(),
                series.len(),
                sentences.len()
            )));
        }
        series.source_id = sentences.source_id.clone();
        return Ok(series);
    }
    let mut remote = RemoteConfig::resolve(cfg.endpoint.as_deref()).map_err(|_| {
        PipelineError::Config(format!(
            "{} is text and needs an embedding source: pass --embeddings <file> or --endpoint <url>, or set {}",
            sentences.source_id,
            embedding::remote::ENDPOINT_ENV
        ))
    })?;
    remote.batch_size = cfg.batch_size;
    remote.bearer_token = cfg.bearer_token.clone();
    fetch_remote(&remote, sentences).map_err(at(Stage::Embed))
}

/// Loads one input. `sidecar` overrides `cfg.embeddings` for text inputs.
pub fn load_document(
    cfg: &AnalysisConfig,
    path: &Path,
    source_id: String,
    sidecar: Option<&Path>,
) -> Result<Document, PipelineError> {
    let kind = cfg.kind_of(path)?;
    let embeddings = match kind {
        InputKind::Text | InputKind::Sentences => {
            let raw = corpus::load_text(path).map_err(at(Stage::Load))?;
            let raw = match cfg.lines {
                Some((a, b)) => raw.restrict_lines(a..=b).map_err(at(Stage::Load))?,
                None => raw,
            };
            let sentences = if kind == InputKind::Text {
                corpus::segment_for_analysis(&raw).map_err(at(Stage::Segment))?
            } else {
                let seq = SentenceSequence::from_lines(&raw.content, source_id.clone());
                seq.require_analyzable().map_err(at(Stage::Segment))?;
                seq
            };
            let sentences = SentenceSequence {
                source_id: source_id.clone(),
                ..sentences
            };
            embed_sentences(cfg, &sentences, sidecar)?
        }
        InputKind::Jsonl | InputKind::Binary => {
            let mut s = read_embeddings(path)?;
            s.source_id = source_id.clone();
            s
        }
        InputKind::Signal => {
            let file = SignalFile::read(path).map_err(at(Stage::Load))?;
            let increments = IncrementSeries::from_values(file.increments, source_id.clone())
                .map_err(at(Stage::Signal))?;
            return Ok(Document {
                source_id,
                genre: None,
                n_sentences: increments.len() + 1,
                increments,
                embeddings: None,
            });
        }
    };
    let increments = signal::increments(&embeddings).map_err(at(Stage::Signal))?;
    Ok(Document {
        source_id,
        genre: None,
        n_sentences: embeddings.len(),
        increments,
        embeddings: Some(embeddings),
    })
}

/// Allan curve and short-time fit of an increment series.
pub fn curve_and_fit(
    cfg: &AnalysisConfig,
    inc: &IncrementSeries,
    n_sentences: usize,
) -> Result<(AllanCurve, SlopeFit), PipelineError> {
    let phase = signal::build_phase(inc);
    let grid =
        allan::make_tau_grid(phase.len(), cfg.points_per_decade).map_err(at(Stage::Allan))?;
    let curve = allan::adev_curve(phase.values(), &grid, inc.source_id.clone())
        .map_err(at(Stage::Allan))?;
    let fit =
        scaling::fit_exponent(&curve, n_sentences, cfg.fit_fraction).map_err(at(Stage::Fit))?;
    Ok((curve, fit))
}

/// Seed of shuffle `index` for a document.
pub fn shuffle_seed(master: u64, source_id: &str, index: usize) -> u64 {
    mix_seed(master, fnv1a64(source_id.as_bytes()), index as u64)
}

pub fn shuffle_section(
    cfg: &AnalysisConfig,
    doc: &Document,
    original_alpha: f64,
    n_shuffles: usize,
) -> Result<ShuffleSection, PipelineError> {
    if n_shuffles == 0 {
        return Err(PipelineError::Config(
            "shuffle test needs at least one shuffle".into(),
        ));
    }
    let seeds: Vec<u64> = (0..n_shuffles)
        .map(|i| shuffle_seed(cfg.seed, &doc.source_id, i))
        .collect();
    let alphas = seeds
        .iter()
        .map(|&seed| {
            let inc = match &doc.embeddings {
                Some(e) => {
                    signal::increments(&signal::permute(e, seed)).map_err(at(Stage::Shuffle))?
                }
                None => doc.increments.permuted(seed),
            };
            curve_and_fit(cfg, &inc, doc.n_sentences)
                .map(|(_, fit)| fit.alpha)
                .map_err(|e| at(Stage::Shuffle)(e.to_string()))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let (mean, std) = mean_std(&alphas);
    Ok(ShuffleSection {
        n_shuffles,
        master_seed: cfg.seed,
        seeds,
        original_alpha,
        shuffled_alphas: alphas,
        mean_shuffled_alpha: mean,
        std_shuffled_alpha: std,
    })
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every analysis step on a loaded document.
pub fn analyze_document(
    cfg: &AnalysisConfig,
    doc: &Document,
) -> Result<AnalysisReport, PipelineError> {
    let started = Instant::now();
    let (curve, fit) = curve_and_fit(cfg, &doc.increments, doc.n_sentences)?;
    let local_slopes = scaling::local_slopes(&curve, cfg.window).map_err(at(Stage::Horizon))?;
    let horizon = scaling::detect_horizon(&curve, &fit, &cfg.horizon_params(), cfg.normalize_by)
        .map_err(at(Stage::Horizon))?;
    let reference = reference_for(&curve, &fit)?;
    let shuffle = match cfg.n_shuffles {
        0 => None,
        n => Some(shuffle_section(cfg, doc, fit.alpha, n)?),
    };
    Ok(AnalysisReport {
        schema: SCHEMA.to_owned(),
        tool_version: TOOL_VERSION.to_owned(),
        source_id: doc.source_id.clone(),
        genre: doc.genre.clone(),
        n_sentences: doc.n_sentences,
        curve,
        fit,
        reference,
        local_slopes,
        horizon,
        shuffle,
        config: cfg.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

fn reference_for(curve: &AllanCurve, fit: &SlopeFit) -> Result<AllanCurve, PipelineError> {
    let taus: Vec<usize> = curve.taus().collect();
    let anchor = allan::intermediate_tau(&taus, fit.fit_tau_min, fit.fit_tau_max)
        .expect("fit window lies on the grid");
    let sigma = curve
        .points
        .iter()
        .find(|p| p.tau == anchor)
        .map(|p| p.sigma)
        .unwrap_or_default();
    let grid = allan::TauGrid::new(taus).map_err(at(Stage::Allan))?;
    allan::reference_curve(
        fit.alpha,
        anchor,
        sigma,
        &grid,
        format!("{}#reference", curve.source_id),
    )
    .map_err(at(Stage::Fit))
}

/// Analyzes the single input of `cfg`.
pub fn analyze(cfg: &AnalysisConfig) -> Result<AnalysisReport, PipelineError> {
    cfg.validate()?;
    let path = match cfg.inputs.as_slice() {
        [p] => p,
        [] => return Err(PipelineError::Config("no input given".into())),
        _ => {
            return Err(PipelineError::Config(
                "analyze takes exactly one input; use batch".into(),
            ))
        }
    };
    let started = Instant::now();
    let doc = load_document(cfg, path, path.display().to_string(), None)?;
    let mut report = analyze_document(cfg, &doc)?;
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Segments a text file and returns the one-sentence-per-line hand-off text.
pub fn segment_file(
    path: &Path,
    lines: Option<(usize, usize)>,
) -> Result<SentenceSequence, PipelineError> {
    let raw = corpus::load_text(path).map_err(at(Stage::Load))?;
    let raw = match lines {
        Some((a, b)) => raw.restrict_lines(a..=b).map_err(at(Stage::Load))?,
        None => raw,
    };
    corpus::segment_sentences(&raw).map_err(at(Stage::Segment))
}
