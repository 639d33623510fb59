use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semadev_core::allan::EnsembleMode;
use semadev_core::scaling::{
    DeviationMode, HorizonParams, DEFAULT_FIT_FRACTION, DEFAULT_PERSISTENCE, DEFAULT_THRESHOLD,
    DEFAULT_WINDOW,
};

use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// Plain text, segmented into sentences.
    Text,
    /// One sentence per line (the `segment` output).
    Sentences,
    Jsonl,
    /// `SEMB` binary embeddings.
    Binary,
    /// Increment series written by `simulate`.
    Signal,
}

impl InputKind {
    /// Guesses the kind from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "txt" | "text" => Some(InputKind::Text),
            "jsonl" => Some(InputKind::Jsonl),
            "semb" | "bin" => Some(InputKind::Binary),
            "json" => Some(InputKind::Signal),
            _ => None,
        }
    }

    pub fn needs_embeddings(self) -> bool {
        matches!(self, InputKind::Text | InputKind::Sentences)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Every knob of a run. Serialized verbatim into each report so the run
/// can be repeated; the bearer token is never written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub inputs: Vec<PathBuf>,
    pub input_kind: Option<InputKind>,
    pub embeddings: Option<PathBuf>,
    pub endpoint: Option<String>,
    #[serde(skip)]
    pub bearer_token: Option<String>,
    pub batch_size: usize,
    /// 1-based inclusive line range applied to text inputs.
    pub lines: Option<(usize, usize)>,
    pub points_per_decade: usize,
    pub fit_fraction: f64,
    pub threshold: f64,
    pub deviation: DeviationMode,
    pub window: usize,
    pub persistence: usize,
    pub normalize_by: Option<f64>,
    pub n_shuffles: usize,
    pub seed: u64,
    pub ensemble_mode: EnsembleMode,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            input_kind: None,
            embeddings: None,
            endpoint: None,
            bearer_token: None,
            batch_size: 64,
            lines: None,
            points_per_decade: 20,
            fit_fraction: DEFAULT_FIT_FRACTION,
            threshold: DEFAULT_THRESHOLD,
            deviation: DeviationMode::Relative,
            window: DEFAULT_WINDOW,
            persistence: DEFAULT_PERSISTENCE,
            normalize_by: None,
            n_shuffles: 0,
            seed: 0,
            ensemble_mode: EnsembleMode::Arithmetic,
            workers: 0,
            output: None,
            format: OutputFormat::Json,
        }
    }
}

impl AnalysisConfig {
    pub fn with_input(path: impl Into<PathBuf>) -> Self {
        Self {
            inputs: vec![path.into()],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(self.fit_fraction > 0.0 && self.fit_fraction <= 0.5) {
            return bad(format!(
                "fit fraction {} must lie in (0, 0.5]",
                self.fit_fraction
            ));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return bad(format!("threshold {} must be positive", self.threshold));
        }
        if self.window < 3 || self.window.is_multiple_of(2) {
            return bad(format!(
                "local-slope window {} must be odd and at least 3",
                self.window
            ));
        }
        if self.persistence == 0 {
            return bad("persistence must be at least 1".into());
        }
        if self.points_per_decade == 0 {
            return bad("points per decade must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if let Some(d) = self.normalize_by {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("normalization divisor {d} must be positive"));
            }
        }
        Ok(())
    }

    pub fn horizon_params(&self) -> HorizonParams {
        HorizonParams {
            threshold: self.threshold,
            window: self.window,
            persistence: self.persistence,
            mode: self.deviation,
        }
    }

    pub fn kind_of(&self, path: &Path) -> Result<InputKind, PipelineError> {
        self.input_kind
            .or_else(|| InputKind::from_path(path))
            .ok_or_else(|| {
                PipelineError::Config(format!(
                    "cannot tell the input kind of {}; pass --kind",
                    path.display()
                ))
            })
    }
}
