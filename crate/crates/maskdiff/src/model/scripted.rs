//! Deterministic scripted-logits model.
//!
//! Forward call `k` returns the pre-recorded step `k` restricted to the
//! queried region. Overrides, caches, and the attention span are ignored
//! by design; the script makes decoder behavior exactly controllable.
//!
//! # File format (version 1)
//!
//! JSON document:
//!
//! ```json
//! {
//!   "version": 1,
//!   "seq_len": 6,
//!   "vocab": 8,
//!   "mask_id": 0,
//!   "eos_id": 1,
//!   "steps": [
//!     { "dense": { "rows": [[0.0, ...], ...] } },
//!     { "sparse": { "fill": -1e9, "entries": [[2, 5, 3.25], ...] } }
//!   ]
//! }
//! ```
//!
//! Each step holds the full `seq_len x vocab` score matrix, either dense
//! (`rows[pos][token]`) or as sparse `(position, token, score)` triples over
//! a default fill score.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::buffer::TokenBuffer;
use crate::error::{EngineError, Result};
use crate::kvcache::KVCache;
use crate::logits::LogitsMatrix;

use super::{validate_region, DiffusionModel, EmbeddingOverride};

pub const SCRIPT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptStep {
    Dense { rows: Vec<Vec<f64>> },
    Sparse { fill: f64, entries: Vec<(usize, u32, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptFile {
    pub version: u32,
    pub seq_len: usize,
    pub vocab: usize,
    pub mask_id: u32,
    pub eos_id: u32,
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, Clone)]
pub struct ScriptedModel {
    seq_len: usize,
    vocab: usize,
    mask_id: u32,
    eos_id: u32,
    /// One full `seq_len * vocab` matrix per forward call.
    steps: Vec<Vec<f64>>,
    cursor: usize,
}

fn schema_err(path: &str, detail: impl Into<String>) -> EngineError {
    EngineError::Schema { path: path.to_string(), detail: detail.into() }
}

impl ScriptedModel {
    pub fn new(seq_len: usize, vocab: usize, mask_id: u32, eos_id: u32, steps: Vec<Vec<f64>>) -> Result<Self> {
        for (i, step) in steps.iter().enumerate() {
            if step.len() != seq_len * vocab {
                return Err(schema_err(
                    "<memory>",
                    format!("step {i} has {} scores, expected {}", step.len(), seq_len * vocab),
                ));
            }
            if let Some(j) = step.iter().position(|s| !s.is_finite()) {
                return Err(EngineError::NonFiniteScore {
                    pos: j / vocab,
                    token: (j % vocab) as u32,
                });
            }
        }
        if mask_id == eos_id || mask_id as usize >= vocab || eos_id as usize >= vocab {
            return Err(schema_err("<memory>", "mask_id and eos_id must be distinct ids inside the vocabulary"));
        }
        Ok(Self { seq_len, vocab, mask_id, eos_id, steps, cursor: 0 })
    }

    pub fn from_file_contents(path: &str, file: ScriptFile) -> Result<Self> {
        if file.version != SCRIPT_SCHEMA_VERSION {
            return Err(schema_err(path, format!("unsupported version {}", file.version)));
        }
        if file.seq_len == 0 || file.vocab == 0 {
            return Err(schema_err(path, "seq_len and vocab must be positive"));
        }
        let mut steps = Vec::with_capacity(file.steps.len());
        for (i, step) in file.steps.iter().enumerate() {
            let mut matrix = match step {
                ScriptStep::Dense { rows } => {
                    if rows.len() != file.seq_len {
                        return Err(schema_err(path, format!("step {i}: {} rows, expected {}", rows.len(), file.seq_len)));
                    }
                    let mut m = Vec::with_capacity(file.seq_len * file.vocab);
                    for (r, row) in rows.iter().enumerate() {
                        if row.len() != file.vocab {
                            return Err(schema_err(path, format!("step {i} row {r}: {} scores, expected {}", row.len(), file.vocab)));
                        }
                        m.extend_from_slice(row);
                    }
                    m
                }
                ScriptStep::Sparse { fill, entries } => {
                    if !fill.is_finite() {
                        return Err(schema_err(path, format!("step {i}: non-finite fill")));
                    }
                    let mut m = vec![*fill; file.seq_len * file.vocab];
                    for &(pos, token, score) in entries {
                        if pos >= file.seq_len || token as usize >= file.vocab {
                            return Err(schema_err(path, format!("step {i}: entry ({pos}, {token}) out of range")));
                        }
                        m[pos * file.vocab + token as usize] = score;
                    }
                    m
                }
            };
            if let Some(j) = matrix.iter().position(|s| !s.is_finite()) {
                return Err(schema_err(path, format!("step {i}: non-finite score at row {}, token {}", j / file.vocab, j % file.vocab)));
            }
            // Normalize -0.0 so dense and sparse encodings of the same
            // matrix replay identically.
            for s in matrix.iter_mut() {
                if *s == 0.0 {
                    *s = 0.0;
                }
            }
            steps.push(matrix);
        }
        Self::new(file.seq_len, file.vocab, file.mask_id, file.eos_id, steps)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let file: ScriptFile =
            serde_json::from_str(&text).map_err(|e| schema_err(&shown, e.to_string()))?;
        Self::from_file_contents(&shown, file)
    }

    pub fn mask_id(&self) -> u32 {
        self.mask_id
    }

    pub fn eos_id(&self) -> u32 {
        self.eos_id
    }

    pub fn steps_total(&self) -> usize {
        self.steps.len()
    }

    pub fn steps_consumed(&self) -> usize {
        self.cursor
    }

    /// Fresh copy with the cursor rewound to step zero.
    pub fn rewound(&self) -> Self {
        let mut m = self.clone();
        m.cursor = 0;
        m
    }
}

impl DiffusionModel for ScriptedModel {
    fn vocab(&self) -> usize {
        self.vocab
    }

    fn max_len(&self) -> usize {
        self.seq_len
    }

    fn forward(
        &mut self,
        tokens: &TokenBuffer,
        _overrides: &EmbeddingOverride,
        _cache: Option<&mut KVCache>,
        region: &[usize],
        attend_len: usize,
    ) -> Result<LogitsMatrix> {
        if tokens.len() > self.seq_len {
            return Err(EngineError::SequenceTooLong { len: tokens.len(), max: self.seq_len });
        }
        validate_region(region, tokens.len(), attend_len)?;
        let step = self
            .steps
            .get(self.cursor)
            .ok_or(EngineError::ScriptExhausted { steps: self.steps.len() })?;
        let mut scores = Vec::with_capacity(region.len() * self.vocab);
        for &pos in region {
            scores.extend_from_slice(&step[pos * self.vocab..(pos + 1) * self.vocab]);
        }
        self.cursor += 1;
        LogitsMatrix::new(region.to_vec(), self.vocab, scores)
    }

    fn compute_kv_full(
        &mut self,
        _tokens: &TokenBuffer,
        _overrides: &EmbeddingOverride,
        _cache: &mut KVCache,
    ) -> Result<()> {
        Ok(())
    }
}
