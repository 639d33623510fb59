use serde::{Deserialize, Serialize};

use semadev_core::allan::AllanCurve;
use semadev_core::scaling::{HorizonResult, LocalSlope, SlopeFit};

use crate::config::AnalysisConfig;

/// Schema tag carried by every JSON document this tool writes.
pub const SCHEMA: &str = "semadev/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleSection {
    pub n_shuffles: usize,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub original_alpha: f64,
    pub shuffled_alphas: Vec<f64>,
    pub mean_shuffled_alpha: f64,
    pub std_shuffled_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub tool_version: String,
    pub source_id: String,
    pub genre: Option<String>,
    pub n_sentences: usize,
    pub curve: AllanCurve,
    pub fit: SlopeFit,
    /// Power law with the fitted exponent, anchored at the middle of the fit window.
    pub reference: AllanCurve,
    pub local_slopes: Vec<LocalSlope>,
    pub horizon: HorizonResult,
    pub shuffle: Option<ShuffleSection>,
    pub config: AnalysisConfig,
    pub wall_time_s: f64,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Copy with the timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}
