//! Benchmark suites: the prompt file schema and the runner.
//!
//! A suite is a JSON document with one record per prompt:
//!
//! ```json
//! {
//!   "version": 1,
//!   "prompts": [
//!     { "id": "p0", "prompt": [5, 7, 9], "reference": "optional answer" }
//!   ]
//! }
//! ```
//!
//! The runner executes one independent engine session per prompt (in
//! parallel under the `parallel` feature; per-sequence results do not
//! depend on scheduling), aggregates TPF/TPS, and assembles a
//! [`RunReport`]. Per-sequence failures are recorded in their row rather
//! than aborting the suite.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::GenerationConfig;
use crate::engine;
use crate::error::{EngineError, Result};
use crate::metrics::{RunReport, SequenceReport};
use crate::model::DiffusionModel;

pub const SUITE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub prompt: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Suite {
    pub version: u32,
    pub prompts: Vec<PromptRecord>,
}

impl Suite {
    pub fn new(prompts: Vec<PromptRecord>) -> Self {
        Self { version: SUITE_SCHEMA_VERSION, prompts }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let suite: Suite = serde_json::from_str(&text).map_err(|e| EngineError::Schema {
            path: shown.clone(),
            detail: e.to_string(),
        })?;
        if suite.version != SUITE_SCHEMA_VERSION {
            return Err(EngineError::Schema {
                path: shown,
                detail: format!("unsupported version {}", suite.version),
            });
        }
        Ok(suite)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("suite serializes");
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn run_one<M>(
    model: &M,
    record: &PromptRecord,
    mask_id: u32,
    eos_id: u32,
    config: &GenerationConfig,
) -> SequenceReport
where
    M: DiffusionModel + Clone,
{
    let mut session_model = model.clone();
    let outcome = engine::generate(&mut session_model, &record.prompt, mask_id, eos_id, config)
        .and_then(|result| {
            SequenceReport::from_result(record.id.clone(), record.reference.clone(), &result)
        });
    match outcome {
        Ok(row) => row,
        Err(err) => SequenceReport::from_error(record.id.clone(), record.reference.clone(), &err),
    }
}

/// Runs every prompt through its own session and aggregates the report.
/// Each session gets a fresh clone of `model` (a scripted model replays
/// from step zero for every prompt).
pub fn run_benchmark<M>(
    model: &M,
    suite: &Suite,
    mask_id: u32,
    eos_id: u32,
    config: &GenerationConfig,
) -> Result<RunReport>
where
    M: DiffusionModel + Clone + Send + Sync,
{
    config.validate()?;
    if suite.prompts.is_empty() {
        return Err(EngineError::EmptySuite);
    }

    #[cfg(feature = "parallel")]
    let rows: Vec<SequenceReport> = suite
        .prompts
        .par_iter()
        .map(|record| run_one(model, record, mask_id, eos_id, config))
        .collect();

    #[cfg(not(feature = "parallel"))]
    let rows: Vec<SequenceReport> = suite
        .prompts
        .iter()
        .map(|record| run_one(model, record, mask_id, eos_id, config))
        .collect();

    Ok(RunReport::assemble(config.clone(), rows))
}
