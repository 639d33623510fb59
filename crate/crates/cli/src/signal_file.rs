//! JSON container for synthetic increment signals, so generated data runs
//! through the same pipeline as embedded text.

use std::path::Path;

use serde::{Deserialize, Serialize};

use semadev_core::signal::{build_phase, IncrementSeries};
use semadev_core::synth::SignalKind;

use crate::report::SCHEMA;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(flatten)]
    pub kind: SignalKind,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFile {
    pub schema: String,
    pub source_id: String,
    pub generator: Option<Generator>,
    pub increments: Vec<f64>,
    pub phase: Vec<f64>,
}

impl SignalFile {
    pub fn new(inc: &IncrementSeries, generator: Option<Generator>) -> Self {
        Self {
            schema: SCHEMA.to_owned(),
            source_id: inc.source_id.clone(),
            generator,
            increments: inc.values().to_vec(),
            phase: build_phase(inc).values().to_vec(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let file: SignalFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.schema != SCHEMA {
            return Err(
                format!("unsupported schema {:?}, expected {SCHEMA:?}", file.schema).into(),
            );
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("signal serializes") + "\n"
    }
}
