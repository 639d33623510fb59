//! Corpus runs: discover documents under a directory, analyze them in
//! parallel, and reduce their curves into ensembles (overall and per
//! genre, where the genre is the top-level subdirectory).

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use semadev_core::allan::{self, AllanCurve, EnsembleCurve, TauGrid};

use crate::config::{AnalysisConfig, InputKind};
use crate::pipeline::{analyze_document, at, load_document, mean_std, PipelineError, Stage};
use crate::report::{AnalysisReport, SCHEMA};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub path: PathBuf,
    /// Embedding file paired with a text input by a shared file stem.
    pub sidecar: Option<PathBuf>,
    /// Path relative to the batch root, `/`-separated.
    pub source_id: String,
    pub genre: Option<String>,
}

fn relative_id(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Finds analyzable files under `root`, sorted by relative path. A text file
/// with a `.jsonl`/`.semb` sibling of the same stem is paired with it, and
/// that sibling is not analyzed on its own.
pub fn discover(root: &Path, skip: Option<&Path>) -> Result<Vec<Job>, PipelineError> {
    if root.is_file() {
        return Ok(vec![Job {
            path: root.to_path_buf(),
            sidecar: None,
            source_id: root.display().to_string(),
            genre: None,
        }]);
    }
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(at(Stage::Load))?;
        let p = entry.path();
        if skip.is_some_and(|s| p.starts_with(s)) {
            continue;
        }
        if entry.file_type().is_file() && InputKind::from_path(p).is_some() {
            files.push(p.to_path_buf());
        }
    }
    let mut paired: HashSet<PathBuf> = HashSet::new();
    let mut jobs = Vec::new();
    for p in &files {
        if InputKind::from_path(p) == Some(InputKind::Text) {
            let sidecar = ["jsonl", "semb", "bin"]
                .iter()
                .map(|ext| p.with_extension(ext))
                .find(|s| s.is_file());
            if let Some(s) = &sidecar {
                paired.insert(s.clone());
            }
            jobs.push((p.clone(), sidecar));
        } else {
            jobs.push((p.clone(), None));
        }
    }
    let mut jobs: Vec<Job> = jobs
        .into_iter()
        .filter(|(p, _)| !paired.contains(p))
        .map(|(path, sidecar)| {
            let source_id = relative_id(root, &path);
            let genre = source_id
                .rsplit_once('/')
                .map(|(dir, _)| dir.split('/').next().unwrap().to_owned());
            Job {
                path,
                sidecar,
                source_id,
                genre,
            }
        })
        .collect();
    jobs.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub source_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenreSummary {
    pub genre: String,
    pub n_texts: usize,
    pub mean_alpha: f64,
    pub std_alpha: f64,
    pub horizons_found: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocSummary {
    pub source_id: String,
    pub genre: Option<String>,
    pub n_sentences: usize,
    pub alpha: f64,
    pub tau_star: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub schema: String,
    pub documents: Vec<DocSummary>,
    pub genres: Vec<GenreSummary>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    /// Sorted by `source_id`.
    pub reports: Vec<AnalysisReport>,
    pub failures: Vec<Failure>,
    pub ensemble: EnsembleCurve,
    pub reference: Option<AllanCurve>,
    pub genre_ensembles: BTreeMap<String, EnsembleCurve>,
    pub summary: BatchSummary,
}

impl BatchOutcome {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Analyzes every discovered document; failures are collected, not fatal,
/// unless nothing succeeds.
pub fn run_batch(cfg: &AnalysisConfig) -> Result<BatchOutcome, PipelineError> {
    cfg.validate()?;
    let root = match cfg.inputs.as_slice() {
        [r] => r,
        [] => return Err(PipelineError::Config("no input directory given".into())),
        _ => return Err(PipelineError::Config("batch takes one directory".into())),
    };
    let jobs = discover(root, cfg.output.as_deref())?;
    if jobs.is_empty() {
        return Err(PipelineError::NoInputs(root.display().to_string()));
    }
    let run = |job: &Job| -> Result<AnalysisReport, PipelineError> {
        let mut doc = load_document(
            cfg,
            &job.path,
            job.source_id.clone(),
            job.sidecar.as_deref(),
        )?;
        doc.genre = job.genre.clone();
        analyze_document(cfg, &doc)
    };
    let results: Vec<(usize, Result<AnalysisReport, PipelineError>)> = if cfg.workers == 1 {
        jobs.iter().enumerate().map(|(i, j)| (i, run(j))).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        pool.install(|| {
            jobs.par_iter()
                .enumerate()
                .map(|(i, j)| (i, run(j)))
                .collect()
        })
    };

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => {
                log::warn!("skipping {}: {e}", jobs[i].source_id);
                failures.push(Failure {
                    source_id: jobs[i].source_id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    reports.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    failures.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    if reports.is_empty() {
        return Err(PipelineError::NoInputs(format!(
            "{} ({} document(s) failed)",
            root.display(),
            failures.len()
        )));
    }

    let curves: Vec<AllanCurve> = reports.iter().map(|r| r.curve.clone()).collect();
    let ensemble = allan::ensemble_average(&curves, cfg.ensemble_mode).map_err(at(Stage::Allan))?;
    let alphas: Vec<f64> = reports.iter().map(|r| r.fit.alpha).collect();
    let reference = ensemble_reference(&ensemble, mean_std(&alphas).0, reports.len());

    let mut by_genre: BTreeMap<String, Vec<&AnalysisReport>> = BTreeMap::new();
    for r in &reports {
        by_genre
            .entry(r.genre.clone().unwrap_or_default())
            .or_default()
            .push(r);
    }
    let mut genre_ensembles = BTreeMap::new();
    let mut genres = Vec::new();
    for (genre, rs) in &by_genre {
        let curves: Vec<AllanCurve> = rs.iter().map(|r| r.curve.clone()).collect();
        genre_ensembles.insert(
            genre.clone(),
            allan::ensemble_average(&curves, cfg.ensemble_mode).map_err(at(Stage::Allan))?,
        );
        let a: Vec<f64> = rs.iter().map(|r| r.fit.alpha).collect();
        let (mean_alpha, std_alpha) = mean_std(&a);
        genres.push(GenreSummary {
            genre: genre.clone(),
            n_texts: rs.len(),
            mean_alpha,
            std_alpha,
            horizons_found: rs.iter().filter(|r| r.horizon.found).count(),
        });
    }
    let summary = BatchSummary {
        schema: SCHEMA.to_owned(),
        documents: reports
            .iter()
            .map(|r| DocSummary {
                source_id: r.source_id.clone(),
                genre: r.genre.clone(),
                n_sentences: r.n_sentences,
                alpha: r.fit.alpha,
                tau_star: r.horizon.tau_star,
            })
            .collect(),
        genres,
        failures: failures.clone(),
    };
    Ok(BatchOutcome {
        reports,
        failures,
        ensemble,
        reference,
        genre_ensembles,
        summary,
    })
}

/// Reference power law with the mean exponent, anchored at the middle of
/// the range every text contributes to.
pub fn ensemble_reference(
    ensemble: &EnsembleCurve,
    alpha: f64,
    n_texts: usize,
) -> Option<AllanCurve> {
    let full: Vec<usize> = ensemble
        .points
        .iter()
        .filter(|p| p.n_texts == n_texts)
        .map(|p| p.tau)
        .collect();
    let anchor = allan::intermediate_tau(&full, *full.first()?, *full.last()?)?;
    let sigma = ensemble.points.iter().find(|p| p.tau == anchor)?.mean_sigma;
    let grid = TauGrid::new(ensemble.points.iter().map(|p| p.tau).collect()).ok()?;
    allan::reference_curve(alpha, anchor, sigma, &grid, "ensemble#reference").ok()
}

fn file_stem_for(source_id: &str) -> String {
    source_id.replace(['/', '\\'], "__")
}

/// Writes per-document reports, ensembles, the reference curve and the
/// summary under `out`.
pub fn write_batch(outcome: &BatchOutcome, out: &Path) -> Result<(), PipelineError> {
    let w = |p: PathBuf, text: String| std::fs::write(&p, text).map_err(at(Stage::Write));
    std::fs::create_dir_all(out.join("reports")).map_err(at(Stage::Write))?;
    for r in &outcome.reports {
        w(
            out.join("reports")
                .join(format!("{}.json", file_stem_for(&r.source_id))),
            r.to_json(),
        )?;
    }
    w(out.join("ensemble.csv"), outcome.ensemble.to_csv())?;
    w(out.join("ensemble.json"), to_json(&outcome.ensemble))?;
    if let Some(r) = &outcome.reference {
        w(out.join("reference.csv"), r.to_csv())?;
    }
    if outcome.genre_ensembles.len() > 1 || outcome.genre_ensembles.keys().any(|g| !g.is_empty()) {
        std::fs::create_dir_all(out.join("genres")).map_err(at(Stage::Write))?;
        for (g, e) in &outcome.genre_ensembles {
            let name = if g.is_empty() { "_root" } else { g.as_str() };
            w(
                out.join("genres").join(format!("{name}.ensemble.csv")),
                e.to_csv(),
            )?;
        }
    }
    w(out.join("summary.json"), to_json(&outcome.summary))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Ensemble over previously written reports, sorted by `source_id`.
pub fn ensemble_from_reports(
    paths: &[PathBuf],
    mode: allan::EnsembleMode,
) -> Result<(EnsembleCurve, Option<AllanCurve>), PipelineError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for p in paths {
        if p.is_dir() {
            for e in walkdir::WalkDir::new(p).sort_by_file_name() {
                let e = e.map_err(at(Stage::Load))?;
                if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "json") {
                    files.push(e.path().to_path_buf());
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    let mut reports: Vec<AnalysisReport> = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(at(Stage::Load))?;
        match AnalysisReport::from_json(&text) {
            Ok(r) if r.schema == SCHEMA => reports.push(r),
            Ok(r) => log::warn!("skipping {}: schema {}", f.display(), r.schema),
            Err(e) => log::warn!("skipping {}: not a report ({e})", f.display()),
        }
    }
    if reports.is_empty() {
        return Err(PipelineError::NoInputs(
            paths
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(", "),
        ));
    }
    reports.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    let curves: Vec<AllanCurve> = reports.iter().map(|r| r.curve.clone()).collect();
    let ensemble = allan::ensemble_average(&curves, mode).map_err(at(Stage::Allan))?;
    let alphas: Vec<f64> = reports.iter().map(|r| r.fit.alpha).collect();
    let reference = ensemble_reference(&ensemble, mean_std(&alphas).0, reports.len());
    Ok((ensemble, reference))
}
