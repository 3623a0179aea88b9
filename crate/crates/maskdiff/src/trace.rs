//! Trace capture and replay.
//!
//! [`TraceRecorder`] wraps any model and records the full logits of every
//! forward. The recording serializes to the scripted-model file format, so
//! replaying a captured trace through the same decoder configuration
//! reproduces the original commit log exactly. Replaying under a different
//! decoder is allowed; the trace is model-side only, so commits may differ.

use std::path::Path;

use crate::buffer::TokenBuffer;
use crate::error::Result;
use crate::kvcache::{CacheSpec, KVCache};
use crate::logits::LogitsMatrix;
use crate::model::scripted::{ScriptFile, ScriptStep, SCRIPT_SCHEMA_VERSION};
use crate::model::{DiffusionModel, EmbeddingOverride, EmbeddingTable, ScriptedModel};

#[derive(Debug, Clone)]
struct RecordedStep {
    region: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

/// Wraps a model and records each forward's region logits.
pub struct TraceRecorder<M> {
    inner: M,
    seq_len: usize,
    steps: Vec<RecordedStep>,
}

impl<M: DiffusionModel> TraceRecorder<M> {
    pub fn new(inner: M) -> Self {
        Self { inner, seq_len: 0, steps: Vec::new() }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn steps_recorded(&self) -> usize {
        self.steps.len()
    }

    /// Converts the recording into a scripted-model file. Steps whose
    /// region covered the whole sequence serialize densely; partial
    /// regions serialize as sparse triples over a low fill score, which
    /// replays identically for the regions the engine actually queries.
    pub fn to_script(&self, mask_id: u32, eos_id: u32) -> ScriptFile {
        let vocab = self.inner.vocab();
        let steps = self
            .steps
            .iter()
            .map(|step| {
                if step.region.len() == self.seq_len {
                    let mut rows = vec![vec![0.0; vocab]; self.seq_len];
                    for (&pos, row) in step.region.iter().zip(&step.rows) {
                        rows[pos] = row.clone();
                    }
                    ScriptStep::Dense { rows }
                } else {
                    let entries = step
                        .region
                        .iter()
                        .zip(&step.rows)
                        .flat_map(|(&pos, row)| {
                            row.iter()
                                .enumerate()
                                .map(move |(v, &s)| (pos, v as u32, s))
                        })
                        .collect();
                    ScriptStep::Sparse { fill: crate::logits::SUPPRESSED_SCORE, entries }
                }
            })
            .collect();
        ScriptFile {
            version: SCRIPT_SCHEMA_VERSION,
            seq_len: self.seq_len,
            vocab,
            mask_id,
            eos_id,
            steps,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>, mask_id: u32, eos_id: u32) -> Result<()> {
        let file = self.to_script(mask_id, eos_id);
        let text = serde_json::to_string(&file).expect("trace serializes");
        std::fs::write(path, text)?;
        Ok(())
    }
}

impl<M: DiffusionModel> DiffusionModel for TraceRecorder<M> {
    fn vocab(&self) -> usize {
        self.inner.vocab()
    }

    fn max_len(&self) -> usize {
        self.inner.max_len()
    }

    fn forward(
        &mut self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: Option<&mut KVCache>,
        region: &[usize],
        attend_len: usize,
    ) -> Result<LogitsMatrix> {
        let logits = self.inner.forward(tokens, overrides, cache, region, attend_len)?;
        self.seq_len = tokens.len();
        self.steps.push(RecordedStep {
            region: region.to_vec(),
            rows: logits.rows().map(|(_, row)| row.to_vec()).collect(),
        });
        Ok(logits)
    }

    fn compute_kv_full(
        &mut self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: &mut KVCache,
    ) -> Result<()> {
        self.inner.compute_kv_full(tokens, overrides, cache)
    }

    fn embedding_table(&self) -> Option<&EmbeddingTable> {
        self.inner.embedding_table()
    }

    fn cache_spec(&self) -> Option<CacheSpec> {
        self.inner.cache_spec()
    }

    fn reference_logits(
        &self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        region: &[usize],
    ) -> Result<Option<LogitsMatrix>> {
        self.inner.reference_logits(tokens, overrides, region)
    }
}

/// Loads a captured trace as a scripted model.
pub fn replay_trace(path: impl AsRef<Path>) -> Result<ScriptedModel> {
    ScriptedModel::load(path)
}
